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


#include "metaplan/config.h"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace metaplan {
namespace {

using nlohmann::json;

// Bump when the solver output for identical settings changes.
constexpr int kPrecomputeFormat = 1;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ParseJson(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

// Rejects keys outside `allowed` so that typos do not silently fall back to
// defaults.
void CheckKeys(const json& obj, const std::string& where,
               const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

double Number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(key + " must be a number");
  return obj[key].get<double>();
}

int Integer(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(key + " must be an integer");
  }
  return obj[key].get<int>();
}

std::string String(const json& obj, const std::string& key,
                   const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(key + " must be a string");
  return obj[key].get<std::string>();
}

Eigen::Vector3d Vec3(const json& v, const std::string& key) {
  if (v.is_number()) return Eigen::Vector3d::Constant(v.get<double>());
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError(key + " must be a number or a list of 3 numbers");
  }
  Eigen::Vector3d out;
  for (int k = 0; k < 3; ++k) {
    if (!v[k].is_number()) throw ConfigError(key + " must hold numbers");
    out[k] = v[k].get<double>();
  }
  return out;
}

Eigen::Vector3d Vec3(const json& obj, const std::string& key,
                     const Eigen::Vector3d& fallback) {
  return obj.contains(key) ? Vec3(obj[key], key) : fallback;
}

Grid2 ParseGrid(const json& g, const Grid2& base) {
  CheckKeys(g, "grid", {"r_min", "r_max", "v_min", "v_max", "nr", "nv"});
  try {
    return Grid2::Create(Number(g, "r_min", base.r_min),
                         Number(g, "r_max", base.r_max),
                         Number(g, "v_min", base.v_min),
                         Number(g, "v_max", base.v_max),
                         Integer(g, "nr", base.nr), Integer(g, "nv", base.nv));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

void FeedHash(std::uint64_t* h, const std::string& s) {
  for (unsigned char c : s) {
    *h ^= c;
    *h *= 0x100000001B3ULL;  // FNV-1a 64
  }
}

std::string Fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g;", x);
  return buf;
}

std::string GridKey(const Grid2& g) {
  return Fmt(g.r_min) + Fmt(g.r_max) + Fmt(g.v_min) + Fmt(g.v_max) +
         Fmt(g.nr) + Fmt(g.nv);
}

}  // namespace

DisturbanceMode ParseDisturbanceMode(const std::string& name) {
  if (name == "none") return DisturbanceMode::kNone;
  if (name == "random") return DisturbanceMode::kRandom;
  if (name == "adversarial") return DisturbanceMode::kAdversarial;
  throw ConfigError("disturbance mode must be none, random or adversarial");
}

ControllerMode ParseControllerMode(const std::string& name) {
  if (name == "optimal") return ControllerMode::kOptimal;
  if (name == "lqr") return ControllerMode::kLqr;
  throw ConfigError("controller must be optimal or lqr");
}

BacktrackMode ParseBacktrackMode(const std::string& name) {
  if (name == "discard") return BacktrackMode::kDiscard;
  if (name == "recursive") return BacktrackMode::kRecursive;
  throw ConfigError("backtrack mode must be discard or recursive");
}

ScenarioSpec ParseScenario(const std::string& text) {
  const json j = ParseJson(text);
  CheckKeys(j, "scenario", {"workspace", "start", "goal", "sensing_radius",
                            "obstacles", "random_obstacles"});
  for (const char* key : {"workspace", "start", "goal"}) {
    if (!j.contains(key)) throw ConfigError(std::string("scenario needs ") + key);
  }
  ScenarioSpec spec;
  Scenario& s = spec.base;
  CheckKeys(j["workspace"], "workspace", {"lo", "hi"});
  s.workspace.lo = Vec3(j["workspace"].at("lo"), "workspace.lo");
  s.workspace.hi = Vec3(j["workspace"].at("hi"), "workspace.hi");
  s.start = Vec3(j["start"], "start");
  s.goal = Vec3(j["goal"], "goal");
  s.sensing_radius = Number(j, "sensing_radius", s.sensing_radius);
  if (j.contains("obstacles")) {
    if (!j["obstacles"].is_array()) throw ConfigError("obstacles must be a list");
    for (const json& o : j["obstacles"]) {
      CheckKeys(o, "obstacle", {"center", "radius"});
      Obstacle ob;
      ob.center = Vec3(o.at("center"), "obstacle.center");
      ob.radius = Number(o, "radius", -1.0);
      if (!(ob.radius > 0.0)) throw ConfigError("obstacle radius must be > 0");
      s.obstacles.push_back(ob);
    }
  }
  if (j.contains("random_obstacles")) {
    const json& r = j["random_obstacles"];
    CheckKeys(r, "random_obstacles",
              {"count", "radius_min", "radius_max", "clearance", "seed"});
    RandomObstacles ro;
    ro.count = Integer(r, "count", ro.count);
    ro.radius_min = Number(r, "radius_min", ro.radius_min);
    ro.radius_max = Number(r, "radius_max", ro.radius_max);
    ro.clearance = Number(r, "clearance", ro.clearance);
    if (r.contains("seed")) ro.seed = r["seed"].get<std::uint64_t>();
    if (ro.count < 0 || !(ro.radius_min > 0.0) ||
        ro.radius_max < ro.radius_min || ro.clearance < 0.0) {
      throw ConfigError("random_obstacles has invalid settings");
    }
    spec.random = ro;
  }
  return spec;
}

ScenarioSpec LoadScenario(const std::filesystem::path& path) {
  return ParseScenario(ReadFile(path));
}

std::vector<Obstacle> GenerateObstacles(const WorkspaceBox& workspace,
                                        const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& goal,
                                        const RandomObstacles& spec,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Obstacle> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < spec.count) {
    if (++attempts > 100000) {
      throw ConfigError("could not place the random obstacles");
    }
    Obstacle o;
    for (int k = 0; k < 3; ++k) {
      o.center[k] = workspace.lo[k] + unit(rng) * (workspace.hi[k] - workspace.lo[k]);
    }
    o.radius = spec.radius_min + unit(rng) * (spec.radius_max - spec.radius_min);
    if ((o.center - start).norm() - o.radius < spec.clearance ||
        (o.center - goal).norm() - o.radius < spec.clearance) {
      continue;
    }
    out.push_back(o);
  }
  return out;
}

Scenario ScenarioSpec::Instantiate(std::uint64_t run_seed) const {
  Scenario s = base;
  if (random) {
    const std::vector<Obstacle> extra =
        GenerateObstacles(s.workspace, s.start, s.goal, *random,
                          random->seed.value_or(run_seed));
    s.obstacles.insert(s.obstacles.end(), extra.begin(), extra.end());
  }
  return s;
}

RunConfig ParseRunConfig(const std::string& text,
                         const std::filesystem::path& base_dir) {
  const json j = ParseJson(text);
  CheckKeys(j, "config",
            {"planners", "disturbance", "limits", "grid", "grid_z", "solver",
             "scenario", "output_dir", "artifact_dir", "seed", "simulation",
             "planning"});
  RunConfig c;

  if (!j.contains("planners") || !j["planners"].is_array()) {
    throw ConfigError("config needs a 'planners' list of per-axis speeds");
  }
  for (const json& p : j["planners"]) {
    try {
      c.planners.emplace_back(Vec3(p, "planners[]"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("planner speed: ") + e.what());
    }
  }

  if (j.contains("disturbance")) {
    const json& d = j["disturbance"];
    CheckKeys(d, "disturbance", {"velocity", "acceleration"});
    c.disturbance.velocity = Vec3(d, "velocity", c.disturbance.velocity);
    c.disturbance.acceleration =
        Vec3(d, "acceleration", c.disturbance.acceleration);
  }
  if (j.contains("limits")) {
    const json& l = j["limits"];
    CheckKeys(l, "limits", {"theta_max", "phi_max", "thrust_min", "thrust_max"});
    c.limits.theta_max = Number(l, "theta_max", c.limits.theta_max);
    c.limits.phi_max = Number(l, "phi_max", c.limits.phi_max);
    c.limits.thrust_min = Number(l, "thrust_min", c.limits.thrust_min);
    c.limits.thrust_max = Number(l, "thrust_max", c.limits.thrust_max);
  }
  if (j.contains("grid")) c.grid_xy = ParseGrid(j["grid"], c.grid_xy);
  c.grid_z = j.contains("grid_z") ? ParseGrid(j["grid_z"], c.grid_xy) : c.grid_xy;

  if (j.contains("solver")) {
    const json& s = j["solver"];
    CheckKeys(s, "solver", {"scheme", "spatial_order", "tol", "max_iterations",
                            "cfl", "level_margin_cells", "horizon_cap",
                            "constrain_switching_tube"});
    const std::string scheme = String(s, "scheme", "godunov");
    if (scheme == "godunov") {
      c.solver.scheme = NumericalHamiltonian::kGodunov;
    } else if (scheme == "lax_friedrichs") {
      c.solver.scheme = NumericalHamiltonian::kLaxFriedrichs;
    } else {
      throw ConfigError("solver.scheme must be godunov or lax_friedrichs");
    }
    const std::string order = String(s, "spatial_order", "weno5");
    if (order == "weno5") {
      c.solver.spatial_order = SpatialOrder::kWeno5;
    } else if (order == "first") {
      c.solver.spatial_order = SpatialOrder::kFirst;
    } else {
      throw ConfigError("solver.spatial_order must be weno5 or first");
    }
    c.solver.tol = Number(s, "tol", c.solver.tol);
    c.solver.max_iterations = Integer(s, "max_iterations", c.solver.max_iterations);
    c.solver.cfl = Number(s, "cfl", c.solver.cfl);
    c.solver.level_margin_cells =
        Number(s, "level_margin_cells", c.solver.level_margin_cells);
    c.solver.horizon_cap = Number(s, "horizon_cap", c.solver.horizon_cap);
    if (s.contains("constrain_switching_tube")) {
      c.solver.constrain_switching_tube = s["constrain_switching_tube"].get<bool>();
    }
  }

  if (!j.contains("scenario")) throw ConfigError("config needs a scenario path");
  c.scenario_path = base_dir / String(j, "scenario", "");
  c.scenario = LoadScenario(c.scenario_path);
  c.output_dir = base_dir / String(j, "output_dir", "out");
  if (j.contains("artifact_dir")) {
    c.artifact_dir = base_dir / String(j, "artifact_dir", "");
  }
  if (j.contains("seed")) c.sim.seed = j["seed"].get<std::uint64_t>();

  c.sim.disturbance_bounds = c.disturbance;
  c.sim.limits = c.limits;
  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    CheckKeys(s, "simulation",
              {"dt", "horizon", "controller", "disturbance", "replan_budget",
               "goal_tolerance", "band_lambda", "lqr_kp", "lqr_kd",
               "max_replan_retries", "replan_iterations"});
    c.sim.dt = Number(s, "dt", c.sim.dt);
    c.sim.horizon = Number(s, "horizon", c.sim.horizon);
    c.sim.controller = ParseControllerMode(String(s, "controller", "optimal"));
    c.sim.disturbance = ParseDisturbanceMode(String(s, "disturbance", "random"));
    c.sim.replan_budget = Number(s, "replan_budget", c.sim.replan_budget);
    c.sim.goal_tolerance = Number(s, "goal_tolerance", c.sim.goal_tolerance);
    c.sim.band_lambda = Number(s, "band_lambda", c.sim.band_lambda);
    c.sim.lqr_kp = Vec3(s, "lqr_kp", c.sim.lqr_kp);
    c.sim.lqr_kd = Vec3(s, "lqr_kd", c.sim.lqr_kd);
    c.sim.max_replan_retries =
        Integer(s, "max_replan_retries", c.sim.max_replan_retries);
    c.sim.replan_grow.max_iterations =
        Integer(s, "replan_iterations", c.sim.replan_grow.max_iterations);
  }
  if (j.contains("planning")) {
    const json& p = j["planning"];
    CheckKeys(p, "planning", {"max_iterations", "max_wall_seconds",
                              "max_edge_length", "goal_radius",
                              "backtrack_mode"});
    GrowOptions& g = c.sim.initial_grow;
    g.max_iterations = Integer(p, "max_iterations", g.max_iterations);
    if (p.contains("max_wall_seconds")) {
      g.max_wall_seconds = Number(p, "max_wall_seconds", 0.0);
    }
    g.max_edge_length = Number(p, "max_edge_length", g.max_edge_length);
    g.goal_radius = Number(p, "goal_radius", g.goal_radius);
    g.mode = ParseBacktrackMode(String(p, "backtrack_mode", "discard"));
  }
  GrowOptions& r = c.sim.replan_grow;
  r.max_edge_length = c.sim.initial_grow.max_edge_length;
  r.goal_radius = c.sim.initial_grow.goal_radius;
  r.mode = c.sim.initial_grow.mode;
  ValidateRunConfig(c);
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(ReadFile(path), path.parent_path());
}

void ValidateRunConfig(const RunConfig& c) {
  if (c.planners.empty()) throw ConfigError("at least one planner is needed");
  for (std::size_t i = 0; i + 1 < c.planners.size(); ++i) {
    if (!(c.planners[i].max_speed().array() >
          c.planners[i + 1].max_speed().array())
             .all()) {
      throw ConfigError(
          "planners must be listed fastest first with strictly decreasing "
          "speed on every axis");
    }
  }
  for (std::size_t i = 0; i < c.planners.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      try {
        SubsystemForAxis(c.limits, c.disturbance, static_cast<Axis>(a),
                         c.planners[i][a]);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("planner " + std::to_string(i) + " axis " +
                          std::to_string(a) + ": " + e.what());
      }
    }
  }
  if (!(c.sim.dt > 0.0)) throw ConfigError("simulation.dt must be > 0");
  if (!(c.sim.horizon > 0.0)) throw ConfigError("simulation.horizon must be > 0");
  if (!(c.sim.replan_budget >= 0.0)) {
    throw ConfigError("simulation.replan_budget must be >= 0");
  }
  if (!(c.sim.goal_tolerance > 0.0)) {
    throw ConfigError("simulation.goal_tolerance must be > 0");
  }
  if (!(c.sim.band_lambda > 0.0 && c.sim.band_lambda < 1.0)) {
    throw ConfigError("simulation.band_lambda must lie in (0, 1)");
  }
  if (c.sim.initial_grow.max_iterations <= 0 ||
      c.sim.replan_grow.max_iterations <= 0) {
    throw ConfigError("planning iteration budgets must be positive");
  }
  if (!(c.sim.initial_grow.max_edge_length > 0.0) ||
      !(c.sim.initial_grow.goal_radius > 0.0)) {
    throw ConfigError("planning edge length and goal radius must be > 0");
  }
  const Scenario& s = c.scenario.base;
  if (!(s.workspace.lo.array() < s.workspace.hi.array()).all()) {
    throw ConfigError("workspace lo must be below hi on every axis");
  }
  if (!s.workspace.Contains(s.start) || !s.workspace.Contains(s.goal)) {
    throw ConfigError("start and goal must lie inside the workspace");
  }
  if (!(s.sensing_radius > 0.0)) throw ConfigError("sensing_radius must be > 0");
}

std::string PrecomputeKey(const RunConfig& c) {
  std::string s = "format=" + std::to_string(kPrecomputeFormat) + ";";
  for (const PlannerSpeed& p : c.planners) {
    for (int a = 0; a < 3; ++a) s += Fmt(p[a]);
  }
  for (int a = 0; a < 3; ++a) {
    s += Fmt(c.disturbance.velocity[a]) + Fmt(c.disturbance.acceleration[a]);
  }
  s += Fmt(c.limits.theta_max) + Fmt(c.limits.phi_max) +
       Fmt(c.limits.thrust_min) + Fmt(c.limits.thrust_max);
  s += GridKey(c.grid_xy) + GridKey(c.grid_z);
  const SolverOptions& o = c.solver;
  s += Fmt(static_cast<int>(o.scheme)) + Fmt(static_cast<int>(o.spatial_order)) +
       Fmt(o.tol) + Fmt(o.max_iterations) + Fmt(o.cfl) +
       Fmt(o.level_margin_cells) + Fmt(o.horizon_cap) +
       Fmt(o.constrain_switching_tube);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  FeedHash(&h, s);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace metaplan
