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

#ifndef METAPLAN_DYNAMICS_H_
#define METAPLAN_DYNAMICS_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace metaplan {

inline constexpr double kGravity = 9.81;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;

// Near-hover quadrotor state [x, y, z, vx, vy, vz]. Yaw is held at zero and
// is not part of the state.
using TrackingState6 = Vector6<double>;

// Kinematic planner position [px, py, pz].
using PlanningState3 = Vector3<double>;

struct TrackingControl {
  double theta = 0.0;  // roll (rad), drives x
  double phi = 0.0;    // pitch (rad), drives y
  double thrust = kGravity;
};

struct Disturbance6 {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();      // m/s
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();  // m/s^2
};

struct DisturbanceBounds {
  Eigen::Vector3d velocity = Eigen::Vector3d::Constant(0.1);
  Eigen::Vector3d acceleration = Eigen::Vector3d::Constant(0.1);

  bool Contains(const Disturbance6& d, double tol = 1e-12) const {
    return ((d.velocity.cwiseAbs() - velocity).array() <= tol).all() &&
           ((d.acceleration.cwiseAbs() - acceleration).array() <= tol).all();
  }
};

// Attitude and thrust authority of the tracker.
struct TrackingLimits {
  double theta_max = 0.15;
  double phi_max = 0.15;
  double thrust_min = 7.81;
  double thrust_max = 11.81;

  bool Admits(const TrackingControl& c, double tol = 1e-12) const {
    return std::abs(c.theta) <= theta_max + tol &&
           std::abs(c.phi) <= phi_max + tol && c.thrust >= thrust_min - tol &&
           c.thrust <= thrust_max + tol;
  }

  // Per-axis admissible acceleration box.
  Eigen::Vector3d AccelMin() const {
    return {-kGravity * std::tan(theta_max), -kGravity * std::tan(phi_max),
            thrust_min - kGravity};
  }
  Eigen::Vector3d AccelMax() const {
    return {kGravity * std::tan(theta_max), kGravity * std::tan(phi_max),
            thrust_max - kGravity};
  }
};

// Per-axis maximum speeds of a kinematic planner.
class PlannerSpeed {
 public:
  PlannerSpeed() = default;
  explicit PlannerSpeed(const Eigen::Vector3d& max_speed);

  const Eigen::Vector3d& max_speed() const { return max_speed_; }
  double operator[](int axis) const { return max_speed_[axis]; }

 private:
  Eigen::Vector3d max_speed_ = Eigen::Vector3d::Ones();
};

// One axis of the relative system: position error and tracker velocity.
struct RelativeState2 {
  double r = 0.0;
  double v = 0.0;
};

// Parameters of a 2D relative subsystem
//   r' = v - dv - b,   v' = u - da
// with u in [accel_min, accel_max], |b| <= b_max, |dv| <= dv_max and
// |da| <= da_max. The z channel stores thrust - g as u and keeps g in
// gravity_offset.
struct Subsystem2Params {
  double accel_min = 0.0;
  double accel_max = 0.0;
  double b_max = 0.0;
  double dv_max = 0.0;
  double da_max = 0.0;
  double gravity_offset = 0.0;

  // Validates authority dominance and sign conventions; throws
  // std::invalid_argument otherwise.
  static Subsystem2Params Create(double accel_min, double accel_max,
                                 double b_max, double dv_max, double da_max,
                                 double gravity_offset = 0.0);

  // Worst-case combined drift of r from planner and velocity disturbance.
  double Drift() const { return b_max + dv_max; }
  // Net accelerations available in each direction after disturbance.
  double NetAccelUp() const { return accel_max - da_max; }
  double NetAccelDown() const { return -accel_min - da_max; }
  // Largest |dH/dp_v| over admissible inputs.
  double MaxAccelMagnitude() const {
    return std::max(std::abs(accel_min), std::abs(accel_max)) + da_max;
  }

  bool operator==(const Subsystem2Params&) const = default;
};

enum class Axis { kX = 0, kY = 1, kZ = 2 };

// Builds the subsystem for one axis of the quadrotor tracking a planner with
// the given speed on that axis.
Subsystem2Params SubsystemForAxis(const TrackingLimits& limits,
                                  const DisturbanceBounds& dist, Axis axis,
                                  double planner_speed);

template <typename Scalar>
Vector6<Scalar> TrackerDerivative(const Vector6<Scalar>& state,
                                  const TrackingControl& control,
                                  const Disturbance6& dist) {
  Vector6<Scalar> dx;
  dx.template head<3>() =
      state.template tail<3>() - dist.velocity.template cast<Scalar>();
  dx[3] = Scalar(kGravity * std::tan(control.theta) - dist.acceleration.x());
  dx[4] = Scalar(-kGravity * std::tan(control.phi) - dist.acceleration.y());
  dx[5] = Scalar(control.thrust - kGravity - dist.acceleration.z());
  return dx;
}

// Checked variant: rejects controls outside the tracker's authority.
TrackingState6 TrackerDerivative(const TrackingState6& state,
                                 const TrackingControl& control,
                                 const Disturbance6& dist,
                                 const TrackingLimits& limits);

// (r', v') = (v - dv - b, u - da). Throws std::invalid_argument when an
// input exceeds its bound in `params`.
RelativeState2 RelativeDerivative(const RelativeState2& rel, double u,
                                  double b, double dv, double da,
                                  const Subsystem2Params& params);

// Per-axis (tracker.a - planner.a, tracker.v_a).
std::array<RelativeState2, 3> LiftAndSubtract(const TrackingState6& tracker,
                                              const PlanningState3& planner);

// Inverse of LiftAndSubtract for the position slots.
Eigen::Vector3d RecoverTrackerPosition(const std::array<RelativeState2, 3>& rel,
                                       const PlanningState3& planner);

// ax = g tan(theta), ay = -g tan(phi), az = T - g.
Eigen::Vector3d ControlToAccel(const TrackingControl& control);

struct AccelCommand {
  TrackingControl control;
  bool saturated = false;
};

// Inverse of ControlToAccel, clamping each channel to the authority box and
// flagging when clamping occurred.
AccelCommand AccelToControl(const Eigen::Vector3d& accel,
                            const TrackingLimits& limits);

// Classic fixed-step fourth-order Runge-Kutta step of x' = f(x).
template <typename State, typename F>
State Rk4Step(const F& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + 0.5 * dt * k1));
  const State k3 = f(State(x + 0.5 * dt * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace metaplan

#endif  // METAPLAN_DYNAMICS_H_
