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


// Command-line entry point: precompute, plan and simulate.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "metaplan/config.h"
#include "metaplan/pipeline.h"
#include "metaplan/reachability.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string artifacts;
  std::string seed;
  std::string seeds;
  std::string controller;
  std::string disturbance;
  std::string backtrack_mode;
  bool force = false;
};

metaplan::RunConfig LoadWithOverrides(const Flags& f) {
  metaplan::RunConfig c = metaplan::LoadRunConfig(f.config);
  if (!f.seed.empty()) c.sim.seed = metaplan::ParseSeedRange(f.seed).at(0);
  if (!f.controller.empty()) {
    c.sim.controller = metaplan::ParseControllerMode(f.controller);
  }
  if (!f.disturbance.empty()) {
    c.sim.disturbance = metaplan::ParseDisturbanceMode(f.disturbance);
  }
  if (!f.backtrack_mode.empty()) {
    c.sim.initial_grow.mode = metaplan::ParseBacktrackMode(f.backtrack_mode);
    c.sim.replan_grow.mode = c.sim.initial_grow.mode;
  }
  return c;
}

std::optional<std::filesystem::path> Opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-planning with precomputed tracking error bounds"};
  app.require_subcommand(1);
  Flags f;

  auto* pre = app.add_subcommand("precompute", "Solve tracking and switching value functions");
  pre->add_option("--config", f.config, "Run config (JSON)")->required();
  pre->add_option("--out", f.out, "Artifact directory");
  pre->add_flag("--force", f.force, "Solve even if artifacts are current");

  auto* plan = app.add_subcommand("plan", "Grow one meta-plan with all obstacles known");
  plan->add_option("--config", f.config, "Run config (JSON)")->required();
  plan->add_option("--out", f.out, "Output directory");
  plan->add_option("--artifacts", f.artifacts, "Artifact directory");
  plan->add_option("--seed", f.seed, "Planner seed");
  plan->add_option("--backtrack-mode", f.backtrack_mode, "discard or recursive");

  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation with replanning");
  sim->add_option("--config", f.config, "Run config (JSON)")->required();
  sim->add_option("--out", f.out, "Output directory");
  sim->add_option("--artifacts", f.artifacts, "Artifact directory");
  sim->add_option("--seed", f.seed, "Single seed");
  sim->add_option("--seeds", f.seeds, "Seed range A..B (inclusive)")->excludes("--seed");
  sim->add_option("--controller", f.controller, "optimal or lqr");
  sim->add_option("--disturbance", f.disturbance, "none, random or adversarial");
  sim->add_option("--backtrack-mode", f.backtrack_mode, "discard or recursive");

  CLI11_PARSE(app, argc, argv);

  try {
    const metaplan::RunConfig config = LoadWithOverrides(f);
    if (pre->parsed()) {
      metaplan::CmdPrecompute(config, metaplan::ResolveArtifactDir(config, Opt(f.out)),
                              std::cout, f.force);
      return 0;
    }
    const metaplan::Precomputed artifacts = metaplan::LoadArtifacts(
        config, metaplan::ResolveArtifactDir(config, Opt(f.artifacts)));
    const std::filesystem::path out = 
        f.out.empty() ? config.output_dir : std::filesystem::path(f.out);
    if (plan->parsed()) {
      return metaplan::CmdPlan(config, artifacts, out, std::cout).plan ? 0 : 1;
    }
    const auto seeds = f.seeds.empty()
                           ? std::vector<std::uint64_t>{config.sim.seed}
                           : metaplan::ParseSeedRange(f.seeds);
    const metaplan::BatchOutcome batch =
        metaplan::CmdSimulate(config, artifacts, seeds, out, std::cout);
    // Exit status counts unsafe runs, 0 when every run stayed safe.
    const int unsafe = std::max(batch.violating_runs, batch.colliding_runs);
    return std::min(unsafe, 100);
  } catch (const metaplan::ArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 101;
  } catch (const metaplan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 102;
  } catch (const metaplan::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 103;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 104;
  }
}
