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


#include "metaplan/safety_control.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

namespace metaplan {
namespace {

double Clamp(double a, double lo, double hi) { return std::clamp(a, lo, hi); }

// Positive bound on a zero costate.
double BangAgainst(double costate, double bound) {
  return costate > 0.0 ? -bound : bound;
}

}  // namespace

LqrController::LqrController(const Eigen::Vector3d& kp,
                             const Eigen::Vector3d& kd,
                             const TrackingLimits& limits)
    : kp_(kp), kd_(kd), limits_(limits) {
  if (!kp.allFinite() || !kd.allFinite()) {
    throw std::invalid_argument("LQR gains must be finite");
  }
}

Eigen::Vector3d LqrController::Accel(
    const Relative3& rel, const Eigen::Vector3d& planner_velocity) const {
  Eigen::Vector3d a;
  for (int k = 0; k < 3; ++k) {
    a[k] = -kp_[k] * rel[k].r - kd_[k] * (rel[k].v - planner_velocity[k]);
  }
  return a;
}

AccelCommand LqrController::Control(
    const Relative3& rel, const Eigen::Vector3d& planner_velocity) const {
  return AccelToControl(Accel(rel, planner_velocity), limits_);
}

Eigen::Vector2cd LqrController::ClosedLoopPoles(int axis) const {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -kp_[axis], -kd_[axis];
  return Eigen::EigenSolver<Eigen::Matrix2d>(a, false).eigenvalues();
}

bool LqrController::IsStable() const {
  for (int k = 0; k < 3; ++k) {
    if (!(ClosedLoopPoles(k).real().array() < 0.0).all()) return false;
  }
  return true;
}

SafetyController::SafetyController(AxisValues values,
                                   const TrackingLimits& limits,
                                   const LqrController& nominal, double lambda)
    : values_(std::move(values)),
      limits_(limits),
      nominal_(nominal),
      lambda_(lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("band fraction lambda must lie in (0, 1)");
  }
  for (int k = 0; k < 3; ++k) {
    if (!values_[k]) throw std::invalid_argument("missing axis value function");
    if (!values_[k]->converged) {
      throw std::invalid_argument("safety controller needs converged values");
    }
    threshold_[k] = (1.0 - lambda_) * values_[k]->MinValue();
  }
}

double SafetyController::AxisAccel(int axis, const RelativeState2& rel,
                                   double planner_velocity, bool* bang,
                                   bool* emergency, double* value) const {
  const ValueFunction2D& vf = *values_[axis];
  const Subsystem2Params& p = vf.params;
  const double nominal = -nominal_.kp()[axis] * rel.r -
                         nominal_.kd()[axis] * (rel.v - planner_velocity);
  *bang = false;
  *emergency = false;
  if (!vf.grid.Contains(rel)) {
    *emergency = true;
    *value = std::numeric_limits<double>::infinity();
    return nominal > 0.0 ? p.accel_max : p.accel_min;
  }
  const ValueSample s = ValueAndGradient(vf, rel);
  *value = s.value;
  const double clamped = Clamp(nominal, p.accel_min, p.accel_max);
  if (s.value < threshold_[axis]) return clamped;
  *bang = true;
  return OptimalAccel(p, s.d_v, clamped);
}

SafetyOutput SafetyController::Control(
    const Relative3& rel, const Eigen::Vector3d& planner_velocity) const {
  SafetyOutput out;
  for (int k = 0; k < 3; ++k) {
    bool emergency = false;
    out.accel[k] = AxisAccel(k, rel[k], planner_velocity[k], &out.bang[k],
                             &emergency, &out.value[k]);
    out.emergency = out.emergency || emergency;
  }
  out.command = AccelToControl(out.accel, limits_);
  return out;
}

double SwitchingAccel(const ValueFunction2D& tube, const RelativeState2& rel) {
  if (!tube.grid.Contains(rel)) {
    throw SwitchingError("relative state left the switching tube grid");
  }
  const ValueSample s = ValueAndGradient(tube, rel);
  if (s.value > 0.0) {
    throw SwitchingError("relative state (" + std::to_string(rel.r) + ", " +
                         std::to_string(rel.v) +
                         ") is outside the switching tube, V = " +
                         std::to_string(s.value));
  }
  const double tie = -std::copysign(1.0, rel.v);
  return OptimalAccel(tube.params, s.d_v,
                      tie > 0 ? tube.params.accel_max : tube.params.accel_min);
}

SwitchingController::SwitchingController(AxisValues tubes,
                                         const SafetyController* target)
    : tubes_(std::move(tubes)), target_(target) {
  if (target_ == nullptr) throw std::invalid_argument("missing target");
  for (const auto& t : tubes_) {
    if (!t) throw std::invalid_argument("missing switching tube");
  }
}

SafetyOutput SwitchingController::Control(
    const Relative3& rel, const Eigen::Vector3d& planner_velocity,
    std::array<bool, 3>* handed_over) const {
  SafetyOutput out;
  for (int k = 0; k < 3; ++k) {
    const ValueFunction2D& small = *target_->values()[k];
    if (!(*handed_over)[k] && small.grid.Contains(rel[k]) &&
        ValueAndGradient(small, rel[k]).value <= 0.0) {
      (*handed_over)[k] = true;
    }
    bool emergency = false;
    if ((*handed_over)[k]) {
      out.accel[k] = target_->AxisAccel(k, rel[k], planner_velocity[k],
                                        &out.bang[k], &emergency,
                                        &out.value[k]);
    } else {
      out.accel[k] = SwitchingAccel(*tubes_[k], rel[k]);
      out.value[k] = ValueAndGradient(*tubes_[k], rel[k]).value;
      out.bang[k] = true;
    }
    out.emergency = out.emergency || emergency;
  }
  out.command = AccelToControl(out.accel, target_->limits());
  return out;
}

Disturbance6 AdversarialDisturbance(const AxisValues& values,
                                    const Relative3& rel,
                                    const DisturbanceBounds& bounds) {
  Disturbance6 d;
  for (int k = 0; k < 3; ++k) {
    const ValueFunction2D& vf = *values[k];
    double p_r = rel[k].r;
    double p_v = rel[k].v;
    if (vf.grid.Contains(rel[k])) {
      const ValueSample s = ValueAndGradient(vf, rel[k]);
      p_r = s.d_r;
      p_v = s.d_v;
    }
    // r' = v - dv - b and v' = u - da, so the disturbance enters with a
    // negative sign in both channels.
    d.velocity[k] = BangAgainst(p_r, bounds.velocity[k]);
    d.acceleration[k] = BangAgainst(p_v, bounds.acceleration[k]);
  }
  return d;
}

}  // namespace metaplan
