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


#include "metaplan/metaplanner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace metaplan {
namespace {

constexpr double kDuplicateEps = 1e-6;
// Stands in for "no incoming edge": slower than every planner.
constexpr int kNoPlanner = std::numeric_limits<int>::max();

}  // namespace

SafetyBound PlannerSuite::LargestBound() const {
  SafetyBound out;
  for (const PlannerSpec& p : planners) {
    out.extent = out.extent.cwiseMax(p.teb.extent);
  }
  for (int i = 0; i < size(); ++i) {
    for (int k = i + 1; k < size(); ++k) {
      out.extent = out.extent.cwiseMax(Ssb(i, k).bound.extent);
    }
  }
  return out;
}

void PlannerSuite::Validate() const {
  if (planners.empty()) throw ConfigError("planner suite is empty");
  for (int i = 0; i + 1 < size(); ++i) {
    const PlannerSpec& a = planners[i];
    const PlannerSpec& b = planners[i + 1];
    if (!(a.speed.max_speed().array() > b.speed.max_speed().array()).all()) {
      throw ConfigError("planner speeds must decrease strictly on every axis");
    }
    if (!b.teb.Within(a.teb)) {
      throw ConfigError("tracking bounds must shrink with planner speed");
    }
  }
  if (static_cast<int>(ssb.size()) != size()) {
    throw ConfigError("switching bound table has the wrong size");
  }
  for (int i = 0; i < size(); ++i) {
    if (static_cast<int>(ssb[i].size()) != size()) {
      throw ConfigError("switching bound table has the wrong size");
    }
    for (int k = i + 1; k < size(); ++k) {
      if (!planners[i].teb.Within(ssb[i][k].bound)) {
        throw ConfigError("switching bound " + std::to_string(i) + "->" +
                          std::to_string(k) +
                          " is smaller than the source tracking bound");
      }
      if (!(ssb[i][k].horizon >= 0.0)) {
        throw ConfigError("switching horizon must be non-negative");
      }
    }
  }
}

int MetaPlan::EdgeAt(double t) const {
  if (edges.empty()) return -1;
  int e = 0;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    if (edges[i].start_time <= t) e = i;
  }
  return e;
}

TrajectorySample MetaPlan::Evaluate(double t) const {
  const int e = EdgeAt(t);
  if (e < 0) return {};
  if (t >= total_time) {
    TrajectorySample s;
    s.position = edges.back().traj.end();
    return s;
  }
  return edges[e].traj.Evaluate(t - edges[e].start_time);
}

bool InformedReject(const Eigen::Vector3d& sample, const Eigen::Vector3d& root,
                    const Eigen::Vector3d& goal, double best_time,
                    const PlannerSpeed& fastest) {
  if (!std::isfinite(best_time)) return false;
  return TravelTimeLowerBound(root, sample, fastest) +
             TravelTimeLowerBound(sample, goal, fastest) >=
         best_time;
}

MetaTree::MetaTree(const PlannerSuite* suite, const Environment* env,
                   const RootContext& root, std::uint64_t seed)
    : suite_(suite), env_(env), root_(root), rng_(seed) {
  if (root.transition_source && !root.planner) {
    throw std::invalid_argument("root transition needs a target planner");
  }
  bool clear = true;
  if (!root.planner) {
    for (const PlannerSpec& p : suite->planners) {
      clear = clear && PointClear(root.position, p.teb, *env);
    }
  } else if (root.transition_source) {
    clear = PointClear(root.position,
                       suite->Ssb(*root.transition_source, *root.planner).bound,
                       *env);
  } else {
    clear = PointClear(root.position, suite->planners.at(*root.planner).teb,
                       *env);
  }
  if (!clear) {
    throw PlanningError("root is in collision under its tracking bound");
  }
  MetaNode n;
  n.position = root.position;
  n.incoming = TimedTrajectory({0.0}, {root.position}, -1);
  nodes_.push_back(n);
  children_.emplace_back();
}

double MetaTree::best_time() const {
  return best_goal_ ? nodes_[*best_goal_].arrival_time
                    : std::numeric_limits<double>::infinity();
}

int MetaTree::AddNode(int parent, int planner, const TimedTrajectory& traj,
                      std::optional<int> ssb_source) {
  MetaNode n;
  n.id = static_cast<int>(nodes_.size());
  n.position = traj.end();
  n.parent = parent;
  n.incoming_planner = planner;
  n.incoming = traj;
  n.arrival_time = nodes_.at(parent).arrival_time + traj.duration();
  n.ssb_source = ssb_source;
  nodes_.push_back(n);
  children_.emplace_back();
  children_[parent].push_back(n.id);
  return n.id;
}

int MetaTree::IncomingPlanner(int v) const {
  if (v == 0) return root_.planner ? *root_.planner : kNoPlanner;
  return nodes_[v].incoming_planner;
}

bool MetaTree::SwitchOk(int i, int k, const TimedTrajectory& traj) const {
  const SwitchBound& sb = suite_->Ssb(i, k);
  // The switch must settle before the next waypoint, whose outgoing edges
  // are only checked against TEB_k.
  return traj.duration() >= sb.horizon &&
         TrajectoryClear(traj, sb.bound, *env_);
}

std::optional<MetaTree::Attachment> MetaTree::Depart(
    int v, int k, const TimedTrajectory& traj, BacktrackMode mode) {
  const int i = IncomingPlanner(v);
  if (v == 0) {
    if (root_.transition_source) {
      // A downgrade may still be settling: keep its target planner and
      // clear the first edge under the switching bound until it settles.
      if (k != *root_.planner) return std::nullopt;
      const SwitchBound& sb = suite_->Ssb(*root_.transition_source, k);
      if (traj.duration() < root_.transition_remaining ||
          !TrajectoryClear(traj, sb.bound, *env_)) {
        return std::nullopt;
      }
      return Attachment{0, root_.transition_source};
    }
    if (i >= k) return Attachment{0, std::nullopt};
    if (SwitchOk(i, k, traj)) return Attachment{0, i};
    return std::nullopt;
  }
  if (i >= k) return Attachment{v, std::nullopt};
  if (SwitchOk(i, k, traj)) return Attachment{v, i};
  if (mode == BacktrackMode::kDiscard) return std::nullopt;

  // Recursive backtrack: arrive at v slowly enough that departing with k
  // is safe, trying the fastest admissible arrival planner first.
  nodes_[v].needs_slower_mark = i + 1;
  for (int slower = i + 1; slower <= k; ++slower) {
    if (slower < k && !SwitchOk(slower, k, traj)) continue;
    const std::optional<int> copy = Reach(v, slower, mode);
    if (copy) {
      return Attachment{*copy,
                        slower < k ? std::optional<int>(slower) : std::nullopt};
    }
  }
  return std::nullopt;
}

std::optional<int> MetaTree::Reach(int w, int k, BacktrackMode mode) {
  if (w == 0) return std::nullopt;  // the root cannot be slowed
  if (nodes_[w].incoming_planner == k) return w;
  const int v = nodes_[w].parent;
  const Eigen::Vector3d target = nodes_[w].position;
  const PlannerSpec& spec = suite_->planners[k];
  TimedTrajectory traj =
      ProfileEdge(nodes_[v].position, target, spec.speed, k);
  if (!TrajectoryClear(traj, spec.teb, *env_)) return std::nullopt;
  const std::optional<Attachment> dep = Depart(v, k, traj, mode);
  if (!dep) return std::nullopt;
  for (int c : children_[dep->node]) {
    const MetaNode& n = nodes_[c];
    if (n.incoming_planner == k && n.ssb_source == dep->ssb_source &&
        (n.position - target).norm() <= kDuplicateEps && !n.is_goal) {
      return c;
    }
  }
  return AddNode(dep->node, k, traj, dep->ssb_source);
}

std::optional<MetaTree::Attachment> MetaTree::VirtualBacktrack(
    int w, int k, const TimedTrajectory& edge, BacktrackMode mode) {
  if (w == 0) return Depart(0, k, edge, mode);
  if (nodes_[w].incoming_planner >= k) return Attachment{w, std::nullopt};
  const std::optional<int> copy = Reach(w, k, mode);
  if (!copy) return std::nullopt;
  return Attachment{*copy, std::nullopt};
}

std::optional<int> MetaTree::Extend(int from, const Eigen::Vector3d& target,
                                    BacktrackMode mode, bool is_goal) {
  const Eigen::Vector3d start = nodes_.at(from).position;
  for (int k = 0; k < suite_->size(); ++k) {
    std::optional<TimedTrajectory> traj =
        PlanEdge(start, target, suite_->planners[k], *env_, k);
    if (!traj) continue;
    // Step 2 stops at the first planner that connects; Step 3 decides.
    const std::optional<Attachment> att =
        VirtualBacktrack(from, k, *traj, mode);
    if (!att) return std::nullopt;
    const int id = AddNode(att->node, k, *traj, att->ssb_source);
    nodes_[id].is_goal = is_goal;
    return id;
  }
  return std::nullopt;
}

int MetaTree::Nearest(const Eigen::Vector3d& p) const {
  int best = 0;
  double best_t = std::numeric_limits<double>::infinity();
  for (const MetaNode& n : nodes_) {
    if (n.is_goal) continue;
    const double t = TravelTimeLowerBound(n.position, p, suite_->fastest());
    if (t < best_t) {
      best_t = t;
      best = n.id;
    }
  }
  return best;
}

void MetaTree::OfferGoal(int id) {
  if (!best_goal_ || nodes_[id].arrival_time < best_time()) best_goal_ = id;
}

void MetaTree::TryGoal(int from, const Eigen::Vector3d& goal,
                       BacktrackMode mode) {
  if ((nodes_[from].position - goal).norm() <= kDuplicateEps) {
    nodes_[from].is_goal = true;
    OfferGoal(from);
    return;
  }
  const std::optional<int> id = Extend(from, goal, mode, true);
  if (id) OfferGoal(*id);
}

std::optional<MetaPlan> MetaTree::Grow(const Eigen::Vector3d& goal,
                                       const GrowOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (nodes_.size() == 1 && !best_goal_ &&
      (goal - root_.position).norm() <= options.goal_radius) {
    TryGoal(0, goal, options.mode);
  }

  const WorkspaceBox& box = env_->workspace();
  std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
  std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
  std::uniform_real_distribution<double> uz(box.lo.z(), box.hi.z());
  for (int it = 0; it < options.max_iterations; ++it) {
    if (options.max_wall_seconds &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count() > *options.max_wall_seconds) {
      break;
    }
    // Draw all three coordinates in a fixed order for reproducibility.
    const double x = ux(rng_);
    const double y = uy(rng_);
    const double z = uz(rng_);
    Eigen::Vector3d sample(x, y, z);
    if (InformedReject(sample, root_.position, goal, best_time(),
                       suite_->fastest())) {
      continue;
    }
    const int w = Nearest(sample);
    const Eigen::Vector3d d = sample - nodes_[w].position;
    const double len = d.norm();
    if (len <= kDuplicateEps) continue;
    if (len > options.max_edge_length) {
      sample = nodes_[w].position + d * (options.max_edge_length / len);
    }
    const std::optional<int> id = Extend(w, sample, options.mode);
    if (id && (goal - sample).norm() <= options.goal_radius) {
      TryGoal(*id, goal, options.mode);
    }
  }
  if (!best_goal_) return std::nullopt;
  return ExtractPlan(*best_goal_);
}

MetaPlan MetaTree::ExtractPlan(int node) const {
  std::vector<int> chain;
  for (int n = node; n != 0; n = nodes_.at(n).parent) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());
  MetaPlan plan;
  double t = 0.0;
  for (int n : chain) {
    const MetaNode& m = nodes_[n];
    MetaEdge e;
    e.planner = m.incoming_planner;
    e.start_time = t;
    e.traj = m.incoming;
    if (m.ssb_source) {
      plan.switches.push_back(
          {static_cast<int>(plan.edges.size()), *m.ssb_source,
           m.incoming_planner, suite_->Ssb(*m.ssb_source, m.incoming_planner)});
    }
    t += m.incoming.duration();
    plan.edges.push_back(std::move(e));
  }
  plan.total_time = t;
  return plan;
}

bool ValidatePlan(const MetaPlan& plan, const PlannerSuite& suite,
                  const Environment& env) {
  double t = 0.0;
  for (int e = 0; e < static_cast<int>(plan.edges.size()); ++e) {
    const MetaEdge& edge = plan.edges[e];
    if (std::abs(edge.start_time - t) > 1e-9) return false;
    if (e > 0 && (edge.traj.start() - plan.edges[e - 1].traj.end()).norm() >
                     1e-9) {
      return false;
    }
    if (!TrajectoryClear(edge.traj, suite.planners.at(edge.planner).teb, env)) {
      return false;
    }
    if (e > 0 && edge.planner > plan.edges[e - 1].planner) {
      const auto it = std::find_if(
          plan.switches.begin(), plan.switches.end(),
          [&](const SwitchRecord& s) { return s.edge == e; });
      if (it == plan.switches.end() || it->from != plan.edges[e - 1].planner ||
          it->to != edge.planner) {
        return false;
      }
    }
    t += edge.traj.duration();
  }
  for (const SwitchRecord& s : plan.switches) {
    const MetaEdge& edge = plan.edges.at(s.edge);
    if (!TrajectoryClear(edge.traj, s.bound.bound, env)) return false;
  }
  return std::abs(t - plan.total_time) <= 1e-9;
}

}  // namespace metaplan
