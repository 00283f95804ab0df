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


#ifndef METAPLAN_METAPLANNER_H_
#define METAPLAN_METAPLANNER_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "metaplan/environment.h"
#include "metaplan/geo_planner.h"

namespace metaplan {

// Bound and settling time for switching from planner i to a slower k.
struct SwitchBound {
  SafetyBound bound;
  double horizon = 0.0;  // s, worst-case time to enter the smaller set
};

// Planners sorted fastest first; index 0 has the largest TEB.
struct PlannerSuite {
  std::vector<PlannerSpec> planners;
  // ssb[i][k] for i < k; other entries are unused.
  std::vector<std::vector<SwitchBound>> ssb;

  int size() const { return static_cast<int>(planners.size()); }
  const SwitchBound& Ssb(int i, int k) const { return ssb.at(i).at(k); }
  const PlannerSpeed& fastest() const { return planners.front().speed; }
  // Largest tracking bound over TEBs and SSBs.
  SafetyBound LargestBound() const;

  // Throws ConfigError unless speeds strictly decrease on every axis, TEBs
  // are nested, and the SSB table is complete with SSB_ik >= TEB_i.
  void Validate() const;
};

enum class BacktrackMode { kDiscard, kRecursive };

// Step-0 context of the tree root.
struct RootContext {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  // Planner of the in-flight edge at the predicted root; empty for a fresh
  // start with zero tracking error.
  std::optional<int> planner;
  // Set when a downgrade into `planner` may still be settling at the root:
  // the source planner and the remaining settling time.
  std::optional<int> transition_source;
  double transition_remaining = 0.0;
};

struct MetaNode {
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  int parent = -1;
  int incoming_planner = -1;  // -1 for the root
  TimedTrajectory incoming;
  double arrival_time = 0.0;
  // Planner of the edge into the parent when the incoming edge is a
  // downgrade validated against SSB_{ssb_source -> incoming_planner}.
  std::optional<int> ssb_source;
  std::optional<int> needs_slower_mark;
  bool is_goal = false;
};

struct MetaEdge {
  int planner = 0;
  double start_time = 0.0;  // from plan start
  TimedTrajectory traj;     // local time
};

struct SwitchRecord {
  int edge = 0;  // index of the edge that performs the switch
  int from = 0;
  int to = 0;
  SwitchBound bound;
};

struct MetaPlan {
  std::vector<MetaEdge> edges;
  std::vector<SwitchRecord> switches;
  double total_time = 0.0;

  bool empty() const { return edges.empty(); }
  // Edge active at plan time t (the last one past the end); -1 if empty.
  int EdgeAt(double t) const;
  TrajectorySample Evaluate(double t) const;
};

struct GrowOptions {
  int max_iterations = 5000;
  std::optional<double> max_wall_seconds;
  double max_edge_length = 2.0;  // m, steering limit toward samples
  double goal_radius = 3.0;      // m, nodes this close try the goal
  BacktrackMode mode = BacktrackMode::kDiscard;
};

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejects iff the fastest-planner travel-time lower bounds root -> sample and
// sample -> goal add up to at least best_time. Never rejects while
// best_time is infinite.
bool InformedReject(const Eigen::Vector3d& sample, const Eigen::Vector3d& root,
                    const Eigen::Vector3d& goal, double best_time,
                    const PlannerSpeed& fastest);

// Random tree over waypoints whose edges carry planner indices. The suite
// and environment must outlive the tree.
class MetaTree {
 public:
  // Throws PlanningError when the root is not clear under the bound it must
  // respect: every TEB for a fresh start, the in-flight TEB on a replan.
  MetaTree(const PlannerSuite* suite, const Environment* env,
           const RootContext& root, std::uint64_t seed);

  // Step 1 loop. Returns the best plan found so far or nullopt.
  std::optional<MetaPlan> Grow(const Eigen::Vector3d& goal,
                               const GrowOptions& options);

  // Steps 2 and 3 for one target from node `from`. Returns the new node id.
  std::optional<int> Extend(int from, const Eigen::Vector3d& target,
                            BacktrackMode mode, bool is_goal = false);

  // Step 3 for a candidate edge from `w` using planner k. Returns the node
  // to attach the new edge to (w or a slowed copy) and the SSB source when
  // the departure is a validated downgrade.
  struct Attachment {
    int node = 0;
    std::optional<int> ssb_source;
  };
  std::optional<Attachment> VirtualBacktrack(int w, int k,
                                             const TimedTrajectory& edge,
                                             BacktrackMode mode);

  // Appends a node without checks; used to build fixtures.
  int AddNode(int parent, int planner, const TimedTrajectory& traj,
              std::optional<int> ssb_source = {});

  int Nearest(const Eigen::Vector3d& p) const;
  MetaPlan ExtractPlan(int node) const;

  const std::vector<MetaNode>& nodes() const { return nodes_; }
  const MetaNode& node(int id) const { return nodes_.at(id); }
  const RootContext& root() const { return root_; }
  std::optional<int> best_goal() const { return best_goal_; }
  double best_time() const;
  std::mt19937_64& rng() { return rng_; }

 private:
  std::optional<Attachment> Depart(int v, int k, const TimedTrajectory& traj,
                                   BacktrackMode mode);
  std::optional<int> Reach(int w, int k, BacktrackMode mode);
  bool SwitchOk(int i, int k, const TimedTrajectory& traj) const;
  int IncomingPlanner(int v) const;
  void TryGoal(int from, const Eigen::Vector3d& goal, BacktrackMode mode);
  void OfferGoal(int id);

  const PlannerSuite* suite_;
  const Environment* env_;
  RootContext root_;
  std::vector<MetaNode> nodes_;
  std::vector<std::vector<int>> children_;
  std::mt19937_64 rng_;
  std::optional<int> best_goal_;
};

// Re-checks every edge under its TEB and every switch under its SSB.
bool ValidatePlan(const MetaPlan& plan, const PlannerSuite& suite,
                  const Environment& env);

}  // namespace metaplan

#endif  // METAPLAN_METAPLANNER_H_
