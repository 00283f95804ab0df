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


#ifndef METAPLAN_CONFIG_H_
#define METAPLAN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaplan/dynamics.h"
#include "metaplan/reachability.h"
#include "metaplan/simulator.h"

namespace metaplan {

// Obstacles drawn at load time. Without an explicit seed the run seed is
// used, so every seed of a batch gets its own world.
struct RandomObstacles {
  int count = 10;
  double radius_min = 0.5;
  double radius_max = 1.2;
  // Minimum gap between a sphere surface and the start or goal.
  double clearance = 1.5;
  std::optional<std::uint64_t> seed;
};

struct ScenarioSpec {
  Scenario base;  // fixed obstacles
  std::optional<RandomObstacles> random;

  // Fixed obstacles plus the random ones for this seed.
  Scenario Instantiate(std::uint64_t run_seed) const;
};

struct RunConfig {
  std::vector<PlannerSpeed> planners;  // fastest first
  DisturbanceBounds disturbance;
  TrackingLimits limits;
  Grid2 grid_xy;
  Grid2 grid_z;
  SolverOptions solver;
  ScenarioSpec scenario;
  std::filesystem::path scenario_path;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> artifact_dir;
  SimConfig sim;  // seed, modes, budgets; sim.initial_grow is the plan budget
};

// Parses JSON text. Relative paths resolve against `base_dir`. Throws
// ConfigError on malformed or invalid input.
RunConfig ParseRunConfig(const std::string& text,
                         const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);
ScenarioSpec ParseScenario(const std::string& text);
ScenarioSpec LoadScenario(const std::filesystem::path& path);

// Checks everything that does not need solved value functions: speed
// ordering, authority dominance per axis, grids, simulation settings and
// scenario geometry. The sensing minimum is checked once bounds exist.
void ValidateRunConfig(const RunConfig& config);

// Places `spec.count` spheres inside the workspace away from start and
// goal. Deterministic in `seed`.
std::vector<Obstacle> GenerateObstacles(const WorkspaceBox& workspace,
                                        const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& goal,
                                        const RandomObstacles& spec,
                                        std::uint64_t seed);

// Hash of every setting that influences precomputed value functions.
std::string PrecomputeKey(const RunConfig& config);

DisturbanceMode ParseDisturbanceMode(const std::string& name);
ControllerMode ParseControllerMode(const std::string& name);
BacktrackMode ParseBacktrackMode(const std::string& name);

}  // namespace metaplan

#endif  // METAPLAN_CONFIG_H_
