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


#ifndef METAPLAN_GEO_PLANNER_H_
#define METAPLAN_GEO_PLANNER_H_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "metaplan/dynamics.h"
#include "metaplan/environment.h"

namespace metaplan {

// A kinematic planner: per-axis speed limits and the tracking bound used to
// inflate obstacles around its reference.
struct PlannerSpec {
  PlannerSpeed speed;
  SafetyBound teb;
};

struct TrajectorySample {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

// Piecewise-linear timed path starting at time 0.
class TimedTrajectory {
 public:
  TimedTrajectory() = default;
  // Times must start at 0 and increase strictly; throws otherwise.
  TimedTrajectory(std::vector<double> times,
                  std::vector<Eigen::Vector3d> points, int planner_id);

  // Clamped to [0, duration]; beyond the end the velocity is zero. At a
  // knot the outgoing segment's velocity is reported.
  TrajectorySample Evaluate(double t) const;

  double duration() const { return times_.empty() ? 0.0 : times_.back(); }
  const Eigen::Vector3d& start() const { return points_.front(); }
  const Eigen::Vector3d& end() const { return points_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  int planner_id() const { return planner_id_; }
  bool empty() const { return points_.empty(); }

  // Portion over [0, t], re-ending at the point reached at t.
  TimedTrajectory Truncated(double t) const;
  // The same path traversed backwards over the same duration.
  TimedTrajectory Reversed() const;

 private:
  std::vector<double> times_;
  std::vector<Eigen::Vector3d> points_;
  int planner_id_ = -1;
};

// Straight move where every axis runs at its own top speed until it
// arrives. The path is a polyline with a corner at each axis arrival.
TimedTrajectory ProfileEdge(const Eigen::Vector3d& start,
                            const Eigen::Vector3d& target,
                            const PlannerSpeed& speed, int planner_id);

// Every piece of `traj` passes SegmentClear under `bound`.
bool TrajectoryClear(const TimedTrajectory& traj, const SafetyBound& bound,
                     const Environment& env);

// ProfileEdge followed by a collision check under spec.teb.
std::optional<TimedTrajectory> PlanEdge(const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& target,
                                        const PlannerSpec& spec,
                                        const Environment& env,
                                        int planner_id);

// max_a |b_a - a_a| / speed_a.
double TravelTimeLowerBound(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const PlannerSpeed& fastest);

}  // namespace metaplan

#endif  // METAPLAN_GEO_PLANNER_H_
