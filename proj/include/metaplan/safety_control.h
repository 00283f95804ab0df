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


#ifndef METAPLAN_SAFETY_CONTROL_H_
#define METAPLAN_SAFETY_CONTROL_H_

#include <array>
#include <memory>
#include <stdexcept>

#include <Eigen/Core>

#include "metaplan/dynamics.h"
#include "metaplan/reachability.h"

namespace metaplan {

// Per-axis value functions (x, y, z). x and y usually share one solve.
using AxisValues = std::array<std::shared_ptr<const ValueFunction2D>, 3>;
using Relative3 = std::array<RelativeState2, 3>;

// Linear feedback a = -kp r - kd (v - b) per axis, where b is the planner
// velocity on that axis. With b = 0 this is the plain -kp r - kd v law.
class LqrController {
 public:
  explicit LqrController(
      const Eigen::Vector3d& kp = Eigen::Vector3d::Constant(4.0),
      const Eigen::Vector3d& kd = Eigen::Vector3d::Constant(3.0),
      const TrackingLimits& limits = {});

  // Unsaturated acceleration request.
  Eigen::Vector3d Accel(const Relative3& rel,
                        const Eigen::Vector3d& planner_velocity) const;
  AccelCommand Control(const Relative3& rel,
                       const Eigen::Vector3d& planner_velocity) const;

  // Eigenvalues of [[0, 1], [-kp, -kd]] for one axis.
  Eigen::Vector2cd ClosedLoopPoles(int axis) const;
  bool IsStable() const;

  const Eigen::Vector3d& kp() const { return kp_; }
  const Eigen::Vector3d& kd() const { return kd_; }
  const TrackingLimits& limits() const { return limits_; }

 private:
  Eigen::Vector3d kp_;
  Eigen::Vector3d kd_;
  TrackingLimits limits_;
};

struct SafetyOutput {
  AccelCommand command;
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // after clamping
  Eigen::Vector3d value = Eigen::Vector3d::Zero();  // V per axis
  std::array<bool, 3> bang = {false, false, false};
  bool emergency = false;  // some axis left its value-function grid
};

// Least-restrictive supervisor: bang-bang optimal control on the band
// V >= (1 - lambda) * min V near the set boundary, the nominal controller
// deeper inside.
class SafetyController {
 public:
  SafetyController(AxisValues values, const TrackingLimits& limits,
                   const LqrController& nominal, double lambda = 0.05);

  SafetyOutput Control(const Relative3& rel,
                       const Eigen::Vector3d& planner_velocity) const;

  // Single-axis acceleration within the axis authority. Sets *bang when the
  // optimal law was used and *emergency when rel is off the grid.
  double AxisAccel(int axis, const RelativeState2& rel, double planner_velocity,
                   bool* bang, bool* emergency, double* value) const;

  double BandThreshold(int axis) const { return threshold_[axis]; }
  const AxisValues& values() const { return values_; }
  const TrackingLimits& limits() const { return limits_; }
  const LqrController& nominal() const { return nominal_; }
  double lambda() const { return lambda_; }

 private:
  AxisValues values_;
  TrackingLimits limits_;
  LqrController nominal_;
  double lambda_;
  std::array<double, 3> threshold_;
};

class SwitchingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bang-bang control from a switching tube's gradient. Throws
// SwitchingError when rel lies outside the tube or its grid.
double SwitchingAccel(const ValueFunction2D& tube, const RelativeState2& rel);

// Drives each axis through its switching tube into the smaller tracking set,
// then hands that axis over to the smaller set's supervisor.
class SwitchingController {
 public:
  SwitchingController(AxisValues tubes, const SafetyController* target);

  // `handed_over` is updated in place; once an axis reaches the smaller set
  // it stays with the target supervisor.
  SafetyOutput Control(const Relative3& rel,
                       const Eigen::Vector3d& planner_velocity,
                       std::array<bool, 3>* handed_over) const;

  const AxisValues& tubes() const { return tubes_; }

 private:
  AxisValues tubes_;
  const SafetyController* target_;
};

// Worst-case bounded disturbance against a value function: each component
// sits at a bound vertex chosen to maximize dV/dt. A zero costate picks the
// positive bound. Off-grid axes push away from the origin.
Disturbance6 AdversarialDisturbance(const AxisValues& values,
                                    const Relative3& rel,
                                    const DisturbanceBounds& bounds);

}  // namespace metaplan

#endif  // METAPLAN_SAFETY_CONTROL_H_
