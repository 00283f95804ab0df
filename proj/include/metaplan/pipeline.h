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


#ifndef METAPLAN_PIPELINE_H_
#define METAPLAN_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaplan/config.h"
#include "metaplan/metaplanner.h"
#include "metaplan/simulator.h"

namespace metaplan {

// Missing, stale or unreadable precomputed artifacts.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Precomputed {
  PlannerSuite suite;
  TrackingTables tables;
};

// In-memory result of solving a suite, with the file each distinct value
// function is stored under.
struct SolvedSuite {
  Precomputed precomputed;
  struct File {
    std::string name;
    std::shared_ptr<const ValueFunction2D> vf;
  };
  std::vector<File> files;
  std::vector<std::array<std::string, 3>> teb_files;  // [planner][axis]
  std::vector<std::vector<std::array<std::string, 3>>> tube_files;  // [i][k][axis]
  int teb_solves = 0;
  int ssb_solves = 0;
};

// Solves one invariant set per planner per distinct axis subsystem, nests
// them slowest to fastest, then solves every switching tube. Solver
// failures are rethrown as SolverError naming the planner and axes.
SolvedSuite SolveSuite(const RunConfig& config, std::ostream* log = nullptr);

// Artifact directory: explicit flag, then METAPLAN_ARTIFACT_DIR, then the
// config's artifact_dir, then <output_dir>/artifacts.
std::filesystem::path ResolveArtifactDir(
    const RunConfig& config, const std::optional<std::filesystem::path>& flag);

struct PrecomputeReport {
  bool skipped = false;
  int teb_solves = 0;
  int ssb_solves = 0;
  double seconds = 0.0;
};

PrecomputeReport CmdPrecompute(const RunConfig& config,
                               const std::filesystem::path& dir,
                               std::ostream& log, bool force = false);

// Loads and checks artifacts against the config; throws ArtifactError with
// a hint to run precompute.
Precomputed LoadArtifacts(const RunConfig& config,
                          const std::filesystem::path& dir);

struct PlanOutcome {
  std::optional<MetaPlan> plan;
  int nodes = 0;
  std::vector<int> planners_used;
};

// One-shot planning with every obstacle known. Writes tree.csv, plan.csv
// and obstacles.csv into `out_dir`.
PlanOutcome CmdPlan(const RunConfig& config, const Precomputed& artifacts,
                    const std::filesystem::path& out_dir, std::ostream& log);

struct BatchOutcome {
  int runs = 0;
  int reached_goal = 0;
  int violating_runs = 0;
  int colliding_runs = 0;
  std::vector<SimSummary> summaries;
};

// Runs each seed and writes trace_seed<N>.csv, plan_seed<N>.csv,
// obstacles_seed<N>.csv and an aggregate summary.txt.
BatchOutcome CmdSimulate(const RunConfig& config, const Precomputed& artifacts,
                         const std::vector<std::uint64_t>& seeds,
                         const std::filesystem::path& out_dir,
                         std::ostream& log);

void ExportTree(const MetaTree& tree, const std::filesystem::path& path);

// Parses "7" or "0..99" (inclusive).
std::vector<std::uint64_t> ParseSeedRange(const std::string& text);

}  // namespace metaplan

#endif  // METAPLAN_PIPELINE_H_
