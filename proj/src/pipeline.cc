// Copyright 2026 The metaplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "metaplan/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "metaplan/value_function_io.h"

namespace metaplan {
namespace {

using nlohmann::json;

constexpr const char* kManifest = "manifest.json";
const char* const kAxisNames[3] = {"x", "y", "z"};

std::string Num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Subsystem2Params AxisParams(const RunConfig& c, int planner, int axis) {
  return SubsystemForAxis(c.limits, c.disturbance, static_cast<Axis>(axis),
                          c.planners[planner][axis]);
}

const Grid2& AxisGrid(const RunConfig& c, int axis) {
  return axis == 2 ? c.grid_z : c.grid_xy;
}

// Axes of one planner grouped by identical subsystem and grid.
std::vector<std::vector<int>> AxisGroups(const RunConfig& c, int planner) {
  std::vector<std::vector<int>> groups;
  for (int a = 0; a < 3; ++a) {
    bool placed = false;
    for (auto& g : groups) {
      if (AxisParams(c, planner, g[0]) == AxisParams(c, planner, a) &&
          AxisGrid(c, g[0]) == AxisGrid(c, a)) {
        g.push_back(a);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({a});
  }
  return groups;
}

std::string GroupLabel(const std::vector<int>& axes) {
  std::string s;
  for (int a : axes) s += kAxisNames[a];
  return s;
}

json Vec(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string PrecomputeHint(const std::filesystem::path& dir) {
  return "; run `metaplan precompute --config <file> --out " + dir.string() +
         "` first";
}

}  // namespace

SolvedSuite SolveSuite(const RunConfig& config, std::ostream* log) {
  ValidateRunConfig(config);
  const int n = static_cast<int>(config.planners.size());
  SolvedSuite out;
  std::vector<std::array<std::shared_ptr<ValueFunction2D>, 3>> teb(n);
  std::vector<std::vector<std::pair<std::vector<int>, std::shared_ptr<ValueFunction2D>>>>
      groups(n);
  out.teb_files.resize(n);

  for (int i = 0; i < n; ++i) {
    for (const std::vector<int>& axes : AxisGroups(config, i)) {
      const std::string what =
          "planner " + std::to_string(i) + " axes " + GroupLabel(axes);
      const auto t0 = std::chrono::steady_clock::now();
      ValueFunction2D vf;
      try {
        vf = SolveInvariantSet(AxisParams(config, i, axes[0]),
                               AxisGrid(config, axes[0]), config.solver);
      } catch (const SolverError& e) {
        throw SolverError(what + ": " + e.what(), e.residual());
      }
      ++out.teb_solves;
      auto ptr = std::make_shared<ValueFunction2D>(std::move(vf));
      if (log) {
        *log << "solved tracking set for " << what << " in "
             << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count()
             << " s\n";
      }
      for (int a : axes) teb[i][a] = ptr;
      groups[i].push_back({axes, ptr});
    }
  }
  // Nest slowest to fastest so that every upgrade lands inside the faster
  // planner's set.
  for (int i = n - 2; i >= 0; --i) {
    for (auto& [axes, vf] : groups[i]) {
      for (int a : axes) RaiseLevelToContain(vf.get(), *teb[i + 1][a]);
    }
  }
  for (int i = 0; i < n; ++i) {
    PlannerSpec spec;
    spec.speed = config.planners[i];
    AxisValues values;
    for (auto& [axes, vf] : groups[i]) {
      const std::string name = "teb_" + std::to_string(i) + "_" +
                               GroupLabel(axes) + ".bin";
      out.files.push_back({name, vf});
      for (int a : axes) out.teb_files[i][a] = name;
    }
    for (int a = 0; a < 3; ++a) {
      spec.teb.extent[a] = ExtractBound(*teb[i][a]);
      values[a] = teb[i][a];
    }
    out.precomputed.suite.planners.push_back(spec);
    out.precomputed.tables.teb.push_back(values);
  }

  PlannerSuite& suite = out.precomputed.suite;
  suite.ssb.assign(n, std::vector<SwitchBound>(n));
  out.precomputed.tables.tubes.assign(n, std::vector<AxisValues>(n));
  out.tube_files.assign(n, std::vector<std::array<std::string, 3>>(n));
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      SwitchBound& sb = suite.ssb[i][k];
      std::map<std::pair<const ValueFunction2D*, const ValueFunction2D*>,
               std::shared_ptr<ValueFunction2D>>
          solved;
      std::vector<std::vector<int>> tube_groups;
      for (int a = 0; a < 3; ++a) {
        const auto key = std::make_pair(teb[i][a].get(), teb[k][a].get());
        auto it = solved.find(key);
        if (it == solved.end()) {
          const std::string what = "switch " + std::to_string(i) + "->" +
                                   std::to_string(k) + " axis " + kAxisNames[a];
          const auto t0 = std::chrono::steady_clock::now();
          ValueFunction2D tube;
          try {
            tube = SolveSsb(*teb[k][a], *teb[i][a], config.solver);
          } catch (const SolverError& e) {
            throw SolverError(what + ": " + e.what(), e.residual());
          }
          ++out.ssb_solves;
          if (log) {
            *log << "solved switching tube for " << what << " in "
                 << std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count()
                 << " s\n";
          }
          it = solved.emplace(key, std::make_shared<ValueFunction2D>(std::move(tube)))
                   .first;
          tube_groups.push_back({a});
        } else {
          for (auto& g : tube_groups) {
            if (out.precomputed.tables.tubes[i][k][g[0]] == it->second) {
              g.push_back(a);
            }
          }
        }
        out.precomputed.tables.tubes[i][k][a] = it->second;
        // The switch never needs less room than the source set itself.
        sb.bound.extent[a] =
            std::max(ExtractBound(*it->second), suite.planners[i].teb.extent[a]);
        sb.horizon = std::max(sb.horizon, it->second->horizon);
      }
      for (const auto& g : tube_groups) {
        const std::string name = "ssb_" + std::to_string(i) + "_" +
                                 std::to_string(k) + "_" + GroupLabel(g) + ".bin";
        out.files.push_back({name, out.precomputed.tables.tubes[i][k][g[0]]});
        for (int a : g) out.tube_files[i][k][a] = name;
      }
    }
  }
  suite.Validate();
  return out;
}

std::filesystem::path ResolveArtifactDir(
    const RunConfig& config, const std::optional<std::filesystem::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("METAPLAN_ARTIFACT_DIR"); env && *env) {
    return env;
  }
  if (config.artifact_dir) return *config.artifact_dir;
  return config.output_dir / "artifacts";
}

PrecomputeReport CmdPrecompute(const RunConfig& config,
                               const std::filesystem::path& dir,
                               std::ostream& log, bool force) {
  PrecomputeReport report;
  if (!force) {
    try {
      LoadArtifacts(config, dir);
      report.skipped = true;
      log << "artifacts in " << dir.string()
          << " match the config; skipping precompute\n";
      return report;
    } catch (const ArtifactError&) {
      // Missing or stale: solve below.
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SolvedSuite solved = SolveSuite(config, &log);
  report.teb_solves = solved.teb_solves;
  report.ssb_solves = solved.ssb_solves;

  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / kManifest);
  for (const SolvedSuite::File& f : solved.files) {
    SaveValueFunction(*f.vf, dir / f.name);
  }
  const PlannerSuite& suite = solved.precomputed.suite;
  json manifest;
  manifest["key"] = PrecomputeKey(config);
  manifest["teb_solves"] = solved.teb_solves;
  manifest["ssb_solves"] = solved.ssb_solves;
  manifest["planners"] = json::array();
  for (int i = 0; i < suite.size(); ++i) {
    manifest["planners"].push_back(
        {{"speed", Vec(suite.planners[i].speed.max_speed())},
         {"teb", Vec(suite.planners[i].teb.extent)},
         {"files", solved.teb_files[i]}});
  }
  manifest["switching"] = json::array();
  for (int i = 0; i < suite.size(); ++i) {
    for (int k = i + 1; k < suite.size(); ++k) {
      manifest["switching"].push_back({{"from", i},
                                       {"to", k},
                                       {"bound", Vec(suite.Ssb(i, k).bound.extent)},
                                       {"horizon", suite.Ssb(i, k).horizon},
                                       {"files", solved.tube_files[i][k]}});
    }
  }
  // Written last: a manifest only exists next to a complete file set.
  WriteText(dir / kManifest, manifest.dump(2) + "\n");
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "precomputed " << report.teb_solves << " tracking sets and "
      << report.ssb_solves << " switching tubes in " << report.seconds
      << " s into " << dir.string() << "\n";
  for (int i = 0; i < suite.size(); ++i) {
    const Eigen::Vector3d& e = suite.planners[i].teb.extent;
    log << "  planner " << i << " TEB " << e.x() << " " << e.y() << " " << e.z()
        << "\n";
  }
  return report;
}

Precomputed LoadArtifacts(const RunConfig& config,
                          const std::filesystem::path& dir) {
  const std::filesystem::path mpath = dir / kManifest;
  std::ifstream in(mpath);
  if (!in) {
    throw ArtifactError("no precomputed value functions in " + dir.string() +
                        PrecomputeHint(dir));
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ArtifactError("unreadable manifest " + mpath.string() + PrecomputeHint(dir));
  }
  const int n = static_cast<int>(config.planners.size());
  try {
    if (manifest.at("key").get<std::string>() != PrecomputeKey(config) ||
        static_cast<int>(manifest.at("planners").size()) != n) {
      throw ArtifactError("artifacts in " + dir.string() +
                          " are stale for this config" + PrecomputeHint(dir));
    }
    Precomputed out;
    std::map<std::string, std::shared_ptr<const ValueFunction2D>> cache;
    auto load = [&](const std::string& name, const Subsystem2Params& params) {
      auto it = cache.find(name);
      if (it != cache.end()) return it->second;
      try {
        auto vf = std::make_shared<const ValueFunction2D>(
            LoadValueFunction(dir / name, params));
        cache[name] = vf;
        return vf;
      } catch (const std::exception& e) {
        throw ArtifactError("cannot load " + (dir / name).string() + ": " +
                            e.what() + PrecomputeHint(dir));
      }
    };
    out.tables.teb.resize(n);
    for (int i = 0; i < n; ++i) {
      const json& p = manifest["planners"][i];
      PlannerSpec spec;
      spec.speed = config.planners[i];
      for (int a = 0; a < 3; ++a) {
        out.tables.teb[i][a] =
            load(p.at("files")[a].get<std::string>(), AxisParams(config, i, a));
        spec.teb.extent[a] = ExtractBound(*out.tables.teb[i][a]);
      }
      out.suite.planners.push_back(spec);
    }
    out.suite.ssb.assign(n, std::vector<SwitchBound>(n));
    out.tables.tubes.assign(n, std::vector<AxisValues>(n));
    for (const json& s : manifest.at("switching")) {
      const int i = s.at("from").get<int>();
      const int k = s.at("to").get<int>();
      if (i < 0 || k <= i || k >= n) throw ArtifactError("bad switching entry");
      SwitchBound& sb = out.suite.ssb[i][k];
      for (int a = 0; a < 3; ++a) {
        // Tubes evolve under the slower planner's dynamics.
        auto tube = load(s.at("files")[a].get<std::string>(), AxisParams(config, k, a));
        out.tables.tubes[i][k][a] = tube;
        sb.bound.extent[a] =
            std::max(ExtractBound(*tube), out.suite.planners[i].teb.extent[a]);
        sb.horizon = std::max(sb.horizon, tube->horizon);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        if (!out.tables.tubes[i][k][0]) {
          throw ArtifactError("manifest lacks switch " + std::to_string(i) +
                              "->" + std::to_string(k) + PrecomputeHint(dir));
        }
      }
    }
    out.suite.Validate();
    return out;
  } catch (const json::exception& e) {
    throw ArtifactError("malformed manifest " + mpath.string() + ": " + e.what() +
                        PrecomputeHint(dir));
  }
}

void ExportTree(const MetaTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "id,parent,planner,x,y,z,arrival_time,ssb_source,is_goal\n";
  for (const MetaNode& n : tree.nodes()) {
    out << n.id << ',' << n.parent << ',' << n.incoming_planner << ','
        << Num(n.position.x()) << ',' << Num(n.position.y()) << ','
        << Num(n.position.z()) << ',' << Num(n.arrival_time) << ','
        << (n.ssb_source ? *n.ssb_source : -1) << ',' << (n.is_goal ? 1 : 0)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PlanOutcome CmdPlan(const RunConfig& config, const Precomputed& artifacts,
                    const std::filesystem::path& out_dir, std::ostream& log) {
  const Scenario scenario = config.scenario.Instantiate(config.sim.seed);
  Environment env(scenario.workspace, scenario.obstacles, scenario.sensing_radius);
  env.RevealAll();
  RootContext root;
  root.position = scenario.start;
  MetaTree tree(&artifacts.suite, &env, root, config.sim.seed);
  PlanOutcome outcome;
  outcome.plan = tree.Grow(scenario.goal, config.sim.initial_grow);
  outcome.nodes = static_cast<int>(tree.nodes().size());

  std::filesystem::create_directories(out_dir);
  ExportTree(tree, out_dir / "tree.csv");
  ExportPlan(outcome.plan ? *outcome.plan : MetaPlan{}, out_dir / "plan.csv");
  SimResult geometry;
  geometry.obstacles = env.obstacles();
  geometry.known.assign(geometry.obstacles.size(), true);
  if (outcome.plan) geometry.schedule = *outcome.plan;
  ExportGeometry(geometry, out_dir / "obstacles.csv", out_dir / "plan.csv");

  log << "tree nodes: " << outcome.nodes << "\n";
  if (!outcome.plan) {
    log << "no plan to the goal within " << config.sim.initial_grow.max_iterations
        << " iterations\n";
    return outcome;
  }
  std::vector<int> used;
  for (const MetaEdge& e : outcome.plan->edges) {
    if (std::find(used.begin(), used.end(), e.planner) == used.end()) {
      used.push_back(e.planner);
    }
  }
  std::sort(used.begin(), used.end());
  outcome.planners_used = used;
  log << "plan time: " << outcome.plan->total_time
      << " s, edges: " << outcome.plan->edges.size()
      << ", switches: " << outcome.plan->switches.size() << ", planners:";
  for (int p : used) log << ' ' << p;
  log << "\n";
  return outcome;
}

BatchOutcome CmdSimulate(const RunConfig& config, const Precomputed& artifacts,
                         const std::vector<std::uint64_t>& seeds,
                         const std::filesystem::path& out_dir,
                         std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  BatchOutcome batch;
  std::ostringstream summary;
  double time_sum = 0.0;
  double time_max = 0.0;
  double ratio_max = 0.0;
  int replans = 0;
  for (std::uint64_t seed : seeds) {
    SimConfig sim = config.sim;
    sim.seed = seed;
    const Scenario scenario = config.scenario.Instantiate(seed);
    const SimResult result =
        RunSimulation(scenario, artifacts.suite, artifacts.tables, sim);
    const std::string tag = "seed" + std::to_string(seed);
    ExportTrace(result.trace, out_dir / ("trace_" + tag + ".csv"));
    ExportGeometry(result, out_dir / ("obstacles_" + tag + ".csv"),
                   out_dir / ("plan_" + tag + ".csv"));
    const SimSummary& s = result.summary;
    ++batch.runs;
    batch.reached_goal += s.reached_goal;
    batch.violating_runs += s.violation_steps > 0;
    batch.colliding_runs += s.collision_steps > 0;
    batch.summaries.push_back(s);
    time_sum += s.final_time;
    time_max = std::max(time_max, s.final_time);
    ratio_max = std::max(ratio_max, s.max_bound_ratio);
    replans += s.replans;
    summary << "[" << tag << "]\n" << FormatSummary(s) << "\n";
    log << tag << ": " << (s.reached_goal ? "goal" : "no goal") << " at t="
        << s.final_time << " violations=" << s.violation_steps
        << " collisions=" << s.collision_steps << " replans=" << s.replans
        << " max_bound_ratio=" << s.max_bound_ratio << "\n";
  }
  std::ostringstream head;
  head << "[aggregate]\n"
       << "runs: " << batch.runs << "\n"
       << "reached_goal: " << batch.reached_goal << "\n"
       << "runs_with_teb_violation: " << batch.violating_runs << "\n"
       << "runs_with_collision: " << batch.colliding_runs << "\n"
       << "replans: " << replans << "\n"
       << "mean_final_time: " << Num(batch.runs ? time_sum / batch.runs : 0.0) << "\n"
       << "max_final_time: " << Num(time_max) << "\n"
       << "max_bound_ratio: " << Num(ratio_max) << "\n\n";
  WriteText(out_dir / "summary.txt", head.str() + summary.str());
  log << head.str();
  return batch;
}

std::vector<std::uint64_t> ParseSeedRange(const std::string& text) {
  auto parse = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad seed '" + text + "'; use N or A..B");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  const std::size_t dots = text.find("..");
  if (dots == std::string::npos) return {parse(text)};
  const std::uint64_t a = parse(text.substr(0, dots));
  const std::uint64_t b = parse(text.substr(dots + 2));
  if (b < a) throw ConfigError("empty seed range '" + text + "'");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  return out;
}

}  // namespace metaplan
