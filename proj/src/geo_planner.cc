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


#include "metaplan/geo_planner.h"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <utility>

namespace metaplan {

TimedTrajectory::TimedTrajectory(std::vector<double> times,
                                 std::vector<Eigen::Vector3d> points,
                                 int planner_id)
    : times_(std::move(times)),
      points_(std::move(points)),
      planner_id_(planner_id) {
  if (times_.empty() || times_.size() != points_.size()) {
    throw std::invalid_argument("trajectory needs matching times and points");
  }
  if (times_.front() != 0.0) {
    throw std::invalid_argument("trajectory must start at time 0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("trajectory times must increase strictly");
    }
  }
}

TrajectorySample TimedTrajectory::Evaluate(double t) const {
  TrajectorySample s;
  if (points_.empty()) return s;
  if (t >= duration()) {
    s.position = points_.back();
    return s;
  }
  t = std::max(t, 0.0);
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double dt = times_[i + 1] - times_[i];
  s.velocity = (points_[i + 1] - points_[i]) / dt;
  s.position = points_[i] + (t - times_[i]) * s.velocity;
  return s;
}

TimedTrajectory TimedTrajectory::Truncated(double t) const {
  if (t >= duration()) return *this;
  t = std::max(t, 0.0);
  std::vector<double> times;
  std::vector<Eigen::Vector3d> points;
  for (std::size_t i = 0; i < times_.size() && times_[i] < t; ++i) {
    times.push_back(times_[i]);
    points.push_back(points_[i]);
  }
  if (times.empty()) {
    times.push_back(0.0);
    points.push_back(points_.front());
  }
  if (t > times.back()) {
    times.push_back(t);
    points.push_back(Evaluate(t).position);
  }
  return TimedTrajectory(std::move(times), std::move(points), planner_id_);
}

TimedTrajectory TimedTrajectory::Reversed() const {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> points;
  const double total = duration();
  for (std::size_t i = times_.size(); i-- > 0;) {
    times.push_back(total - times_[i]);
    points.push_back(points_[i]);
  }
  return TimedTrajectory(std::move(times), std::move(points), planner_id_);
}

TimedTrajectory ProfileEdge(const Eigen::Vector3d& start,
                            const Eigen::Vector3d& target,
                            const PlannerSpeed& speed, int planner_id) {
  const Eigen::Vector3d delta = target - start;
  const Eigen::Vector3d arrival =
      delta.cwiseAbs().cwiseQuotient(speed.max_speed());
  std::array<double, 3> knots = {arrival[0], arrival[1], arrival[2]};
  std::sort(knots.begin(), knots.end());
  std::vector<double> times = {0.0};
  std::vector<Eigen::Vector3d> points = {start};
  for (double t : knots) {
    if (t <= times.back()) continue;
    Eigen::Vector3d p;
    for (int a = 0; a < 3; ++a) {
      p[a] = arrival[a] <= t ? target[a]
                             : start[a] + std::copysign(speed[a] * t, delta[a]);
    }
    times.push_back(t);
    points.push_back(p);
  }
  return TimedTrajectory(std::move(times), std::move(points), planner_id);
}

bool TrajectoryClear(const TimedTrajectory& traj, const SafetyBound& bound,
                     const Environment& env) {
  const auto& pts = traj.points();
  if (pts.size() == 1) return PointClear(pts.front(), bound, env);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!SegmentClear(pts[i], pts[i + 1], bound, env)) return false;
  }
  return true;
}

std::optional<TimedTrajectory> PlanEdge(const Eigen::Vector3d& start,
                                        const Eigen::Vector3d& target,
                                        const PlannerSpec& spec,
                                        const Environment& env,
                                        int planner_id) {
  TimedTrajectory traj = ProfileEdge(start, target, spec.speed, planner_id);
  if (!TrajectoryClear(traj, spec.teb, env)) return std::nullopt;
  return traj;
}

double TravelTimeLowerBound(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const PlannerSpeed& fastest) {
  return (b - a).cwiseAbs().cwiseQuotient(fastest.max_speed()).maxCoeff();
}

}  // namespace metaplan
