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


#include "metaplan/simulator.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace metaplan {
namespace {

// splitmix64 finalizer; derives independent streams from one seed.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int PlannerAt(const MetaPlan& schedule, double t) {
  const int e = schedule.EdgeAt(t);
  return e < 0 ? -1 : schedule.edges[e].planner;
}

std::string Num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void SpliceSchedule(MetaPlan* schedule, double t_root, const MetaPlan& next) {
  MetaPlan out;
  for (const MetaEdge& edge : schedule->edges) {
    if (edge.start_time >= t_root) break;
    MetaEdge copy = edge;
    copy.traj = edge.traj.Truncated(t_root - edge.start_time);
    out.edges.push_back(std::move(copy));
  }
  const int kept = static_cast<int>(out.edges.size());
  for (const SwitchRecord& s : schedule->switches) {
    if (s.edge < kept) out.switches.push_back(s);
  }
  for (const MetaEdge& edge : next.edges) {
    MetaEdge copy = edge;
    copy.start_time += t_root;
    out.edges.push_back(std::move(copy));
  }
  for (SwitchRecord s : next.switches) {
    s.edge += kept;
    out.switches.push_back(s);
  }
  out.total_time = next.empty() ? std::min(t_root, schedule->total_time)
                                : t_root + next.total_time;
  *schedule = std::move(out);
}

SimResult RunSimulation(const Scenario& scenario, const PlannerSuite& suite,
                        const TrackingTables& tables, const SimConfig& config) {
  suite.Validate();
  if (!(config.dt > 0.0) || !(config.replan_budget >= 0.0)) {
    throw ConfigError("simulation needs dt > 0 and a non-negative budget");
  }
  const int n = suite.size();
  if (static_cast<int>(tables.teb.size()) != n ||
      static_cast<int>(tables.tubes.size()) != n) {
    throw ConfigError("tracking tables do not match the planner suite");
  }
  ValidateSensingRadius(scenario.sensing_radius, suite.LargestBound(),
                        suite.fastest().max_speed(), config.replan_budget);

  Environment env(scenario.workspace, scenario.obstacles,
                  scenario.sensing_radius);
  const LqrController lqr(config.lqr_kp, config.lqr_kd, config.limits);
  std::vector<SafetyController> controllers;
  controllers.reserve(n);
  for (int i = 0; i < n; ++i) {
    controllers.emplace_back(tables.teb[i], config.limits, lqr,
                             config.band_lambda);
  }
  std::mt19937_64 rng(MixSeed(config.seed, 0));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SimResult result;
  SimSummary& summary = result.summary;
  MetaPlan& schedule = result.schedule;
  TrackingState6 x = TrackingState6::Zero();
  x.head<3>() = scenario.start;

  int active = -1;
  std::optional<int> source;  // downgrade in progress: source -> active
  double switch_started = 0.0;
  std::array<bool, 3> handed = {false, false, false};
  std::optional<double> retry_at;
  double replanning_until = -1.0;
  int retries = 0;

  // Plans from the Step-0 predicted root and splices the result in.
  auto replan = [&](double t, bool initial) {
    const double t_root = initial ? t : t + config.replan_budget;
    RootContext root;
    if (schedule.empty()) {
      root.position = scenario.start;
      if (!initial) root.planner = n - 1;
    } else {
      root.position = schedule.Evaluate(t_root).position;
      root.planner = PlannerAt(schedule, t_root);
      double settle_until = -1.0;
      if (source && active == *root.planner) {
        settle_until = switch_started + suite.Ssb(*source, active).horizon;
        if (t_root < settle_until) root.transition_source = source;
      }
      for (const SwitchRecord& s : schedule.switches) {
        const double st = schedule.edges[s.edge].start_time;
        if (st > t && st <= t_root && s.to == *root.planner &&
            t_root < st + s.bound.horizon && st + s.bound.horizon > settle_until) {
          settle_until = st + s.bound.horizon;
          root.transition_source = s.from;
        }
      }
      if (root.transition_source) {
        root.transition_remaining = settle_until - t_root;
      }
    }
    ++summary.replans;
    replanning_until = t_root;
    std::optional<MetaPlan> plan;
    try {
      MetaTree tree(&suite, &env, root,
                    MixSeed(config.seed, 1 + summary.replans));
      plan = tree.Grow(scenario.goal,
                       initial ? config.initial_grow : config.replan_grow);
    } catch (const PlanningError&) {
      plan.reset();
    }
    if (plan) {
      SpliceSchedule(&schedule, t_root, *plan);
      retry_at.reset();
      retries = 0;
      return;
    }
    ++summary.replan_failures;
    // Fallback: reverse along the traversed part of the current edge, or
    // stop if that is not clear either.
    MetaPlan fallback;
    const int e = schedule.EdgeAt(t_root);
    if (e >= 0 && t_root < schedule.total_time) {
      const MetaEdge& edge = schedule.edges[e];
      TimedTrajectory back =
          edge.traj.Truncated(t_root - edge.start_time).Reversed();
      const SafetyBound bound =
          root.transition_source
              ? suite.Ssb(*root.transition_source, edge.planner).bound
              : suite.planners[edge.planner].teb;
      if (back.duration() > 0.0 && TrajectoryClear(back, bound, env)) {
        fallback.edges.push_back({edge.planner, 0.0, back});
        fallback.total_time = back.duration();
      }
    }
    if (!schedule.empty()) SpliceSchedule(&schedule, t_root, fallback);
    retry_at = t_root;
    ++retries;
  };

  const long max_steps = std::lround(config.horizon / config.dt);
  for (long step = 0; step <= max_steps; ++step) {
    const double t = step * config.dt;
    const std::vector<int> revealed = env.Sense(x.head<3>());
    if (step == 0) {
      replan(t, true);
    } else if (!revealed.empty() ||
               (retry_at && t >= *retry_at - 1e-12)) {
      if (retries > config.max_replan_retries) {
        summary.failure = "replanning kept failing";
        break;
      }
      replan(t, false);
    }

    TrajectorySample ref;
    ref.position = scenario.start;
    int planner = n - 1;
    if (!schedule.empty()) {
      ref = schedule.Evaluate(t);
      planner = PlannerAt(schedule, t);
    }
    if (planner != active) {
      if (active >= 0 && planner > active) {
        // Downgrade: settle through the tube from the largest set involved.
        source = source ? std::min(*source, active) : active;
        handed = {false, false, false};
        switch_started = t;
        ++summary.switches;
      } else {
        source.reset();
      }
      active = planner;
    }

    StepRecord rec;
    rec.t = t;
    rec.state = x;
    rec.reference = ref.position;
    rec.reference_velocity = ref.velocity;
    rec.rel = LiftAndSubtract(x, ref.position);
    rec.planner = active;
    rec.switch_from = source ? *source : -1;
    rec.bound = source ? suite.Ssb(*source, active).bound.extent
                       : suite.planners[active].teb.extent;

    const AxisValues& guard =
        source ? tables.tubes[*source][active] : tables.teb[active];
    SafetyOutput out;
    if (source) {
      const SwitchingController sw(guard, &controllers[active]);
      try {
        out = sw.Control(rec.rel, ref.velocity, &handed);
      } catch (const SwitchingError&) {
        out = controllers[active].Control(rec.rel, ref.velocity);
        out.emergency = true;
        handed = {true, true, true};
      }
    } else {
      out = controllers[active].Control(rec.rel, ref.velocity);
    }
    if (config.controller == ControllerMode::kLqr) {
      out.command = lqr.Control(rec.rel, ref.velocity);
    }

    Disturbance6& d = rec.disturbance;
    switch (config.disturbance) {
      case DisturbanceMode::kNone:
        break;
      case DisturbanceMode::kRandom:
        for (int k = 0; k < 3; ++k) {
          d.velocity[k] = unit(rng) * config.disturbance_bounds.velocity[k];
        }
        for (int k = 0; k < 3; ++k) {
          d.acceleration[k] =
              unit(rng) * config.disturbance_bounds.acceleration[k];
        }
        break;
      case DisturbanceMode::kAdversarial:
        d = AdversarialDisturbance(guard, rec.rel, config.disturbance_bounds);
        break;
    }
    if (source && handed[0] && handed[1] && handed[2]) source.reset();

    rec.control = out.command.control;
    rec.value = out.value;
    rec.emergency = out.emergency;
    rec.replanning = t < replanning_until;
    for (int k = 0; k < 3; ++k) {
      const double ratio = std::abs(rec.rel[k].r) / rec.bound[k];
      summary.max_bound_ratio = std::max(summary.max_bound_ratio, ratio);
      if (std::abs(rec.rel[k].r) > rec.bound[k] + 1e-9) rec.teb_violation = true;
    }
    rec.collision = InCollision(x.head<3>(), env);
    summary.violation_steps += rec.teb_violation;
    summary.collision_steps += rec.collision;
    summary.emergency_steps += rec.emergency;
    result.trace.push_back(rec);
    summary.steps = static_cast<int>(result.trace.size());
    summary.final_time = t;

    if (!schedule.empty() && t >= schedule.total_time &&
        (ref.position - scenario.goal).norm() < 1e-9 &&
        ((x.head<3>() - scenario.goal).cwiseAbs().array() <=
         config.goal_tolerance)
            .all()) {
      summary.reached_goal = true;
      break;
    }
    const TrackingControl control = out.command.control;
    x = Rk4Step(
        [&](const TrackingState6& s) {
          return TrackerDerivative<double>(s, control, d);
        },
        x, config.dt);
  }

  std::set<int> used;
  for (const MetaEdge& e : schedule.edges) used.insert(e.planner);
  summary.planners_used.assign(used.begin(), used.end());
  result.obstacles = env.obstacles();
  for (int i = 0; i < static_cast<int>(env.obstacles().size()); ++i) {
    result.known.push_back(env.known(i));
  }
  return result;
}

const std::vector<std::string>& TraceColumns() {
  static const std::vector<std::string> kColumns = {
      "t",         "x",         "y",         "z",        "vx",
      "vy",        "vz",        "ref_x",     "ref_y",    "ref_z",
      "ref_vx",    "ref_vy",    "ref_vz",    "r_x",      "v_x",
      "r_y",       "v_y",       "r_z",       "v_z",      "planner",
      "switch_from", "bound_x", "bound_y",   "bound_z",  "theta",
      "phi",       "thrust",    "dv_x",      "dv_y",     "dv_z",
      "da_x",      "da_y",      "da_z",      "value_x",  "value_y",
      "value_z",   "teb_violation", "collision", "replanning", "emergency"};
  return kColumns;
}

void ExportTrace(const std::vector<StepRecord>& trace,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto& cols = TraceColumns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  for (const StepRecord& r : trace) {
    std::vector<double> v = {r.t};
    for (int k = 0; k < 6; ++k) v.push_back(r.state[k]);
    for (int k = 0; k < 3; ++k) v.push_back(r.reference[k]);
    for (int k = 0; k < 3; ++k) v.push_back(r.reference_velocity[k]);
    for (int k = 0; k < 3; ++k) {
      v.push_back(r.rel[k].r);
      v.push_back(r.rel[k].v);
    }
    v.push_back(r.planner);
    v.push_back(r.switch_from);
    for (int k = 0; k < 3; ++k) v.push_back(r.bound[k]);
    v.push_back(r.control.theta);
    v.push_back(r.control.phi);
    v.push_back(r.control.thrust);
    for (int k = 0; k < 3; ++k) v.push_back(r.disturbance.velocity[k]);
    for (int k = 0; k < 3; ++k) v.push_back(r.disturbance.acceleration[k]);
    for (int k = 0; k < 3; ++k) v.push_back(r.value[k]);
    v.push_back(r.teb_violation);
    v.push_back(r.collision);
    v.push_back(r.replanning);
    v.push_back(r.emergency);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << (i ? "," : "") << Num(v[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<StepRecord> ReadTrace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
  std::vector<StepRecord> trace;
  const std::size_t ncols = TraceColumns().size();
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != ncols) throw std::runtime_error("malformed trace row");
    StepRecord r;
    std::size_t c = 0;
    r.t = v[c++];
    for (int k = 0; k < 6; ++k) r.state[k] = v[c++];
    for (int k = 0; k < 3; ++k) r.reference[k] = v[c++];
    for (int k = 0; k < 3; ++k) r.reference_velocity[k] = v[c++];
    for (int k = 0; k < 3; ++k) {
      r.rel[k].r = v[c++];
      r.rel[k].v = v[c++];
    }
    r.planner = static_cast<int>(v[c++]);
    r.switch_from = static_cast<int>(v[c++]);
    for (int k = 0; k < 3; ++k) r.bound[k] = v[c++];
    r.control.theta = v[c++];
    r.control.phi = v[c++];
    r.control.thrust = v[c++];
    for (int k = 0; k < 3; ++k) r.disturbance.velocity[k] = v[c++];
    for (int k = 0; k < 3; ++k) r.disturbance.acceleration[k] = v[c++];
    for (int k = 0; k < 3; ++k) r.value[k] = v[c++];
    r.teb_violation = v[c++] != 0.0;
    r.collision = v[c++] != 0.0;
    r.replanning = v[c++] != 0.0;
    r.emergency = v[c++] != 0.0;
    trace.push_back(r);
  }
  return trace;
}

void ExportPlan(const MetaPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "edge,planner,t,x,y,z\n";
  for (int e = 0; e < static_cast<int>(plan.edges.size()); ++e) {
    const MetaEdge& edge = plan.edges[e];
    for (std::size_t i = 0; i < edge.traj.times().size(); ++i) {
      const Eigen::Vector3d& p = edge.traj.points()[i];
      out << e << ',' << edge.planner << ','
          << Num(edge.start_time + edge.traj.times()[i]) << ',' << Num(p.x())
          << ',' << Num(p.y()) << ',' << Num(p.z()) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void ExportGeometry(const SimResult& result,
                    const std::filesystem::path& obstacles_path,
                    const std::filesystem::path& plan_path) {
  std::ofstream out(obstacles_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + obstacles_path.string());
  out << "index,cx,cy,cz,radius,known\n";
  for (std::size_t i = 0; i < result.obstacles.size(); ++i) {
    const Obstacle& o = result.obstacles[i];
    out << i << ',' << Num(o.center.x()) << ',' << Num(o.center.y()) << ','
        << Num(o.center.z()) << ',' << Num(o.radius) << ','
        << (result.known[i] ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + obstacles_path.string());
  ExportPlan(result.schedule, plan_path);
}

std::string FormatSummary(const SimSummary& s) {
  std::ostringstream out;
  out << "steps: " << s.steps << '\n'
      << "final_time: " << Num(s.final_time) << '\n'
      << "reached_goal: " << (s.reached_goal ? "true" : "false") << '\n'
      << "teb_violation_steps: " << s.violation_steps << '\n'
      << "collision_steps: " << s.collision_steps << '\n'
      << "emergency_steps: " << s.emergency_steps << '\n'
      << "replans: " << s.replans << '\n'
      << "replan_failures: " << s.replan_failures << '\n'
      << "switches: " << s.switches << '\n'
      << "max_bound_ratio: " << Num(s.max_bound_ratio) << '\n'
      << "planners_used:";
  for (int p : s.planners_used) out << ' ' << p;
  out << '\n';
  if (!s.failure.empty()) out << "failure: " << s.failure << '\n';
  return out.str();
}

}  // namespace metaplan
