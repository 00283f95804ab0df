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


#ifndef METAPLAN_SIMULATOR_H_
#define METAPLAN_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metaplan/dynamics.h"
#include "metaplan/environment.h"
#include "metaplan/metaplanner.h"
#include "metaplan/safety_control.h"

namespace metaplan {

// Value functions behind a PlannerSuite: one set of axis values per planner
// and one set of switching tubes per ordered pair i < k.
struct TrackingTables {
  std::vector<AxisValues> teb;
  std::vector<std::vector<AxisValues>> tubes;  // tubes[i][k], i < k
};

struct Scenario {
  WorkspaceBox workspace;
  std::vector<Obstacle> obstacles;
  double sensing_radius = 3.0;
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d goal = Eigen::Vector3d::Zero();
};

enum class DisturbanceMode { kNone, kRandom, kAdversarial };
enum class ControllerMode { kOptimal, kLqr };

struct SimConfig {
  double dt = 0.01;
  double horizon = 120.0;  // s
  DisturbanceMode disturbance = DisturbanceMode::kRandom;
  ControllerMode controller = ControllerMode::kOptimal;
  double replan_budget = 1.0;  // s of simulated time per replan
  std::uint64_t seed = 0;
  double goal_tolerance = 0.1;  // m per axis
  GrowOptions initial_grow;
  GrowOptions replan_grow = {1500, {}, 2.0, 3.0, BacktrackMode::kDiscard};
  int max_replan_retries = 20;
  DisturbanceBounds disturbance_bounds;
  TrackingLimits limits;
  Eigen::Vector3d lqr_kp = Eigen::Vector3d::Constant(4.0);
  Eigen::Vector3d lqr_kd = Eigen::Vector3d::Constant(3.0);
  double band_lambda = 0.05;
};

struct StepRecord {
  double t = 0.0;
  TrackingState6 state = TrackingState6::Zero();
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  Eigen::Vector3d reference_velocity = Eigen::Vector3d::Zero();
  Relative3 rel{};
  int planner = 0;
  int switch_from = -1;  // source planner while a downgrade settles
  Eigen::Vector3d bound = Eigen::Vector3d::Zero();
  TrackingControl control;
  Disturbance6 disturbance;
  Eigen::Vector3d value = Eigen::Vector3d::Zero();
  bool teb_violation = false;
  bool collision = false;
  bool replanning = false;
  bool emergency = false;
};

struct SimSummary {
  int steps = 0;
  bool reached_goal = false;
  double final_time = 0.0;
  int violation_steps = 0;
  int collision_steps = 0;
  int emergency_steps = 0;
  int replans = 0;
  int replan_failures = 0;
  int switches = 0;
  // Largest per-axis |r| / active bound over the run.
  double max_bound_ratio = 0.0;
  std::vector<int> planners_used;
  std::string failure;  // non-empty when the run could not continue
};

struct SimResult {
  std::vector<StepRecord> trace;
  SimSummary summary;
  MetaPlan schedule;  // the reference actually followed, absolute times
  std::vector<Obstacle> obstacles;
  std::vector<bool> known;
};

// Inserts `next` into `schedule` at absolute time t_root, dropping whatever
// followed t_root.
void SpliceSchedule(MetaPlan* schedule, double t_root, const MetaPlan& next);

// Closed-loop run. Throws ConfigError when the sensing radius is below the
// minimum for the suite's largest bound and fastest planner.
SimResult RunSimulation(const Scenario& scenario, const PlannerSuite& suite,
                        const TrackingTables& tables, const SimConfig& config);

// Column order of the trace CSV.
const std::vector<std::string>& TraceColumns();

// One row per step, numbers printed with %.17g. Throws std::runtime_error on
// IO failure.
void ExportTrace(const std::vector<StepRecord>& trace,
                 const std::filesystem::path& path);
std::vector<StepRecord> ReadTrace(const std::filesystem::path& path);

// Obstacles (with final known flags) and waypoints of a schedule.
void ExportGeometry(const SimResult& result,
                    const std::filesystem::path& obstacles_path,
                    const std::filesystem::path& plan_path);
void ExportPlan(const MetaPlan& plan, const std::filesystem::path& path);

// "key: value" lines; deterministic for identical runs.
std::string FormatSummary(const SimSummary& summary);

}  // namespace metaplan

#endif  // METAPLAN_SIMULATOR_H_
