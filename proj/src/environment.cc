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


#include "metaplan/environment.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace metaplan {

Environment::Environment(const WorkspaceBox& workspace,
                         std::vector<Obstacle> obstacles,
                         double sensing_radius)
    : workspace_(workspace),
      obstacles_(std::move(obstacles)),
      known_(obstacles_.size(), false),
      sensing_radius_(sensing_radius) {
  if (!(workspace.lo.array() < workspace.hi.array()).all()) {
    throw ConfigError("workspace box must be non-empty");
  }
  if (!(sensing_radius >= 0.0)) {
    throw ConfigError("sensing radius must be non-negative");
  }
  for (const Obstacle& o : obstacles_) {
    if (!(o.radius > 0.0) || !o.center.allFinite()) {
      throw ConfigError("obstacle radius must be positive");
    }
  }
}

std::vector<int> Environment::Sense(const Eigen::Vector3d& position) {
  std::vector<int> revealed;
  for (int i = 0; i < static_cast<int>(obstacles_.size()); ++i) {
    if (known_[i]) continue;
    const Obstacle& o = obstacles_[i];
    if ((o.center - position).norm() - o.radius <= sensing_radius_) {
      known_[i] = true;
      known_indices_.push_back(i);
      revealed.push_back(i);
    }
  }
  return revealed;
}

void Environment::RevealAll() {
  for (int i = 0; i < static_cast<int>(obstacles_.size()); ++i) {
    if (!known_[i]) {
      known_[i] = true;
      known_indices_.push_back(i);
    }
  }
}

double PointBoxDistance(const Eigen::Vector3d& point,
                        const Eigen::Vector3d& box_center,
                        const Eigen::Vector3d& extent) {
  return ((point - box_center).cwiseAbs() - extent).cwiseMax(0.0).norm();
}

bool PointClear(const Eigen::Vector3d& q, const SafetyBound& bound,
                const Environment& env) {
  if (!env.workspace().Contains(q, bound.extent)) return false;
  for (int i : env.known_indices()) {
    const Obstacle& o = env.obstacles()[i];
    if (PointBoxDistance(o.center, q, bound.extent) <= o.radius) return false;
  }
  return true;
}

bool SegmentClear(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                  const SafetyBound& bound, const Environment& env) {
  // The shrunk workspace is convex, so the end points decide containment.
  if (!env.workspace().Contains(p0, bound.extent) ||
      !env.workspace().Contains(p1, bound.extent)) {
    return false;
  }
  const Eigen::Vector3d d = p1 - p0;
  const double length = d.norm();
  const double reach = bound.extent.norm();
  const double step = std::max(bound.extent.minCoeff() / 4.0, 1e-3);
  const int n = std::max(1, static_cast<int>(std::ceil(length / step)));
  for (int i : env.known_indices()) {
    const Obstacle& o = env.obstacles()[i];
    // Cheap rejection by the distance from the center to the segment.
    const double t_line =
        length > 0.0 ? std::clamp((o.center - p0).dot(d) / (length * length),
                                  0.0, 1.0)
                     : 0.0;
    if ((p0 + t_line * d - o.center).norm() > o.radius + reach) continue;

    auto f = [&](double t) {
      return PointBoxDistance(o.center, p0 + t * d, bound.extent);
    };
    int best = 0;
    double best_f = f(0.0);
    for (int k = 1; k <= n; ++k) {
      const double fk = f(static_cast<double>(k) / n);
      if (fk < best_f) {
        best_f = fk;
        best = k;
      }
    }
    if (best_f <= o.radius) return false;
    double a = static_cast<double>(std::max(best - 1, 0)) / n;
    double b = static_cast<double>(std::min(best + 1, n)) / n;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double e = a + inv_phi * (b - a);
    double fc = f(c);
    double fe = f(e);
    for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - inv_phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + inv_phi * (b - a);
        fe = f(e);
      }
    }
    if (std::min({fc, fe, best_f}) <= o.radius) return false;
  }
  return true;
}

bool InCollision(const Eigen::Vector3d& point, const Environment& env) {
  for (const Obstacle& o : env.obstacles()) {
    if ((point - o.center).norm() < o.radius) return true;
  }
  return false;
}

Eigen::Vector3d SensingMinimum(const SafetyBound& bound_max,
                               const Eigen::Vector3d& planner_max_speed,
                               double replan_budget) {
  if (replan_budget < 0.0 || (bound_max.extent.array() < 0.0).any() ||
      (planner_max_speed.array() < 0.0).any()) {
    throw ConfigError("sensing minimum needs non-negative inputs");
  }
  return bound_max.extent + planner_max_speed * replan_budget;
}

void ValidateSensingRadius(double sensing_radius, const SafetyBound& bound_max,
                           const Eigen::Vector3d& planner_max_speed,
                           double replan_budget) {
  const double required =
      SensingMinimum(bound_max, planner_max_speed, replan_budget).norm();
  if (sensing_radius < required) {
    throw ConfigError("sensing radius " + std::to_string(sensing_radius) +
                      " m is below the required " + std::to_string(required) +
                      " m for the largest tracking bound and fastest planner");
  }
}

}  // namespace metaplan
