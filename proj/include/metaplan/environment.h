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


#ifndef METAPLAN_ENVIRONMENT_H_
#define METAPLAN_ENVIRONMENT_H_

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace metaplan {

// Axis-aligned half-extents of a position bound (TEB or SSB).
struct SafetyBound {
  Eigen::Vector3d extent = Eigen::Vector3d::Zero();

  // Componentwise extent <= other.extent.
  bool Within(const SafetyBound& other) const {
    return (extent.array() <= other.extent.array()).all();
  }
};

struct Obstacle {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

struct WorkspaceBox {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Ones();

  bool Contains(const Eigen::Vector3d& p,
                const Eigen::Vector3d& margin = Eigen::Vector3d::Zero()) const {
    return ((p - lo).array() >= margin.array()).all() &&
           ((hi - p).array() >= margin.array()).all();
  }
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Static spherical obstacles, each either known to the planner or still
// hidden. Obstacles become known through Sense() and never revert.
class Environment {
 public:
  Environment(const WorkspaceBox& workspace, std::vector<Obstacle> obstacles,
              double sensing_radius);

  // Reveals every hidden obstacle whose surface lies within the sensing
  // radius of `position` (closed ball). Returns the newly revealed indices.
  std::vector<int> Sense(const Eigen::Vector3d& position);
  void RevealAll();

  const WorkspaceBox& workspace() const { return workspace_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  bool known(int i) const { return known_[i]; }
  const std::vector<int>& known_indices() const { return known_indices_; }
  double sensing_radius() const { return sensing_radius_; }

 private:
  WorkspaceBox workspace_;
  std::vector<Obstacle> obstacles_;
  std::vector<bool> known_;
  std::vector<int> known_indices_;
  double sensing_radius_;
};

// Distance from `point` to the axis-aligned box centered at `box_center`
// with the given half-extents; zero inside the box.
double PointBoxDistance(const Eigen::Vector3d& point,
                        const Eigen::Vector3d& box_center,
                        const Eigen::Vector3d& extent);

// True when the box of `bound` centered at q is inside the workspace and
// clear of every known obstacle.
bool PointClear(const Eigen::Vector3d& q, const SafetyBound& bound,
                const Environment& env);

// True when PointClear holds along the whole segment p0 -> p1. The
// box-to-center distance is convex along the segment, so each obstacle is
// sampled at min(extent) / 4 and the best sample refined by golden-section
// search.
bool SegmentClear(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                  const SafetyBound& bound, const Environment& env);

// True when `point` lies inside any obstacle, known or not.
bool InCollision(const Eigen::Vector3d& point, const Environment& env);

// Per-axis minimum sensing distance: bound extent plus the distance the
// planner reference can travel during one replanning budget.
Eigen::Vector3d SensingMinimum(const SafetyBound& bound_max,
                               const Eigen::Vector3d& planner_max_speed,
                               double replan_budget);

// Throws ConfigError when the sensing radius is below the Euclidean norm of
// SensingMinimum, the worst direction for an axis-aligned box.
void ValidateSensingRadius(double sensing_radius, const SafetyBound& bound_max,
                           const Eigen::Vector3d& planner_max_speed,
                           double replan_budget);

}  // namespace metaplan

#endif  // METAPLAN_ENVIRONMENT_H_
