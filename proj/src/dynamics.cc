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

#include "metaplan/dynamics.h"

#include <string>

namespace metaplan {
namespace {

constexpr double kBoundTol = 1e-12;

void CheckBound(double value, double bound, const char* name) {
  if (std::abs(value) > bound + kBoundTol) {
    throw std::invalid_argument(std::string(name) + " = " +
                                std::to_string(value) + " exceeds bound " +
                                std::to_string(bound));
  }
}

}  // namespace

PlannerSpeed::PlannerSpeed(const Eigen::Vector3d& max_speed)
    : max_speed_(max_speed) {
  if (!(max_speed.array() > 0.0).all() || !max_speed.allFinite()) {
    throw std::invalid_argument("planner speeds must be finite and positive");
  }
}

Subsystem2Params Subsystem2Params::Create(double accel_min, double accel_max,
                                          double b_max, double dv_max,
                                          double da_max,
                                          double gravity_offset) {
  if (!(accel_min < 0.0 && accel_max > 0.0)) {
    throw std::invalid_argument("acceleration range must straddle zero");
  }
  if (b_max < 0.0 || dv_max < 0.0 || da_max < 0.0) {
    throw std::invalid_argument("input bounds must be non-negative");
  }
  Subsystem2Params p{accel_min, accel_max, b_max, dv_max, da_max,
                     gravity_offset};
  if (p.NetAccelUp() <= 0.0 || p.NetAccelDown() <= 0.0) {
    throw std::invalid_argument(
        "control authority must dominate the acceleration disturbance "
        "(accel bound " +
        std::to_string(std::min(accel_max, -accel_min)) + " <= da_max " +
        std::to_string(da_max) + "); no bounded tracking error exists");
  }
  return p;
}

Subsystem2Params SubsystemForAxis(const TrackingLimits& limits,
                                  const DisturbanceBounds& dist, Axis axis,
                                  double planner_speed) {
  const int a = static_cast<int>(axis);
  return Subsystem2Params::Create(limits.AccelMin()[a], limits.AccelMax()[a],
                                  planner_speed, dist.velocity[a],
                                  dist.acceleration[a],
                                  axis == Axis::kZ ? kGravity : 0.0);
}

TrackingState6 TrackerDerivative(const TrackingState6& state,
                                 const TrackingControl& control,
                                 const Disturbance6& dist,
                                 const TrackingLimits& limits) {
  if (!limits.Admits(control)) {
    throw std::invalid_argument("tracking control outside authority box");
  }
  return TrackerDerivative<double>(state, control, dist);
}

RelativeState2 RelativeDerivative(const RelativeState2& rel, double u,
                                  double b, double dv, double da,
                                  const Subsystem2Params& params) {
  if (u < params.accel_min - kBoundTol || u > params.accel_max + kBoundTol) {
    throw std::invalid_argument("tracker acceleration outside authority");
  }
  CheckBound(b, params.b_max, "planner control");
  CheckBound(dv, params.dv_max, "velocity disturbance");
  CheckBound(da, params.da_max, "acceleration disturbance");
  return {rel.v - dv - b, u - da};
}

std::array<RelativeState2, 3> LiftAndSubtract(const TrackingState6& tracker,
                                              const PlanningState3& planner) {
  std::array<RelativeState2, 3> rel;
  for (int a = 0; a < 3; ++a) {
    rel[a] = {tracker[a] - planner[a], tracker[a + 3]};
  }
  return rel;
}

Eigen::Vector3d RecoverTrackerPosition(const std::array<RelativeState2, 3>& rel,
                                       const PlanningState3& planner) {
  return planner + Eigen::Vector3d(rel[0].r, rel[1].r, rel[2].r);
}

Eigen::Vector3d ControlToAccel(const TrackingControl& control) {
  return {kGravity * std::tan(control.theta),
          -kGravity * std::tan(control.phi), control.thrust - kGravity};
}

AccelCommand AccelToControl(const Eigen::Vector3d& accel,
                            const TrackingLimits& limits) {
  const Eigen::Vector3d lo = limits.AccelMin();
  const Eigen::Vector3d hi = limits.AccelMax();
  const Eigen::Vector3d clamped = accel.cwiseMax(lo).cwiseMin(hi);
  AccelCommand cmd;
  cmd.saturated = (clamped - accel).cwiseAbs().maxCoeff() > kBoundTol;
  cmd.control.theta = std::atan(clamped.x() / kGravity);
  cmd.control.phi = std::atan(-clamped.y() / kGravity);
  cmd.control.thrust = clamped.z() + kGravity;
  // Round-off in atan/tan can leave the angle a hair outside the box.
  cmd.control.theta =
      std::clamp(cmd.control.theta, -limits.theta_max, limits.theta_max);
  cmd.control.phi = std::clamp(cmd.control.phi, -limits.phi_max, limits.phi_max);
  cmd.control.thrust =
      std::clamp(cmd.control.thrust, limits.thrust_min, limits.thrust_max);
  return cmd;
}

}  // namespace metaplan
