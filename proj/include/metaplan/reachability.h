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

#ifndef METAPLAN_REACHABILITY_H_
#define METAPLAN_REACHABILITY_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metaplan/dynamics.h"

namespace metaplan {

// Uniform grid over one relative subsystem, r along rows and v along
// columns. Spacings include both end points: d = (max - min) / (n - 1).
struct Grid2 {
  double r_min = -1.5;
  double r_max = 1.5;
  double v_min = -2.5;
  double v_max = 2.5;
  int nr = 201;
  int nv = 201;

  static constexpr int kMinCells = 32;

  // Throws std::invalid_argument on unordered extents or too few cells.
  static Grid2 Create(double r_min, double r_max, double v_min, double v_max,
                      int nr, int nv);

  double dr() const { return (r_max - r_min) / (nr - 1); }
  double dv() const { return (v_max - v_min) / (nv - 1); }
  double r(int i) const { return r_min + i * dr(); }
  double v(int j) const { return v_min + j * dv(); }
  bool Contains(const RelativeState2& s) const {
    return s.r >= r_min && s.r <= r_max && s.v >= v_min && s.v <= v_max;
  }

  bool operator==(const Grid2&) const = default;
};

enum class ValueKind : std::uint32_t {
  kInvariant = 1,  // infinite-horizon tracking error value (TEB source)
  kBrt = 2,        // backward reachable tube (SSB source)
};

// Gridded value function over a relative subsystem. Stored values are
// shifted so that the set of interest is {V <= 0}: for kInvariant the
// absolute worst-case |r| value minus `level`, for kBrt the tube value
// whose target is the smaller tracking set.
struct ValueFunction2D {
  Grid2 grid;
  Eigen::MatrixXd values;  // nr x nv
  ValueKind kind = ValueKind::kInvariant;
  Subsystem2Params params;
  double level = 0.0;    // absolute cost level subtracted from `values`
  double horizon = 0.0;  // backward time reached (s)
  bool converged = false;

  // Central-difference gradients, derived from `values` on demand.
  Eigen::MatrixXd grad_r;
  Eigen::MatrixXd grad_v;

  void ComputeGradients();
  double MinValue() const { return values.minCoeff(); }
  bool InSet(int i, int j) const { return values(i, j) <= 0.0; }
};

enum class NumericalHamiltonian {
  kLaxFriedrichs,
  kGodunov,
};

enum class SpatialOrder {
  kFirst,  // plain one-sided differences
  kWeno5,
};

struct SolverOptions {
  NumericalHamiltonian scheme = NumericalHamiltonian::kGodunov;
  SpatialOrder spatial_order = SpatialOrder::kWeno5;
  // Convergence threshold on max per-cell |dV/dtau| (value units per second
  // of backward time).
  double tol = 1e-2;
  int max_iterations = 20000;
  double cfl = 0.5;
  // Invariant level above the minimum of the value, in units of dr. A
  // positive margin leaves room for sampled-data control.
  double level_margin_cells = 3.0;
  double horizon_cap = 30.0;  // s, for tube growth
  // Confine the switching tube to the larger tracking set's position
  // range before falling back to the unconstrained tube.
  bool constrain_switching_tube = true;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class OutOfDomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Estimate of dV/dtau (tau = backward time) for the game in which the
// tracker minimizes and the planner and disturbances maximize. Returns the
// stable time step for options.cfl.
double NumericalRate(const Grid2& grid, const Subsystem2Params& params,
                     const Eigen::MatrixXd& values,
                     const SolverOptions& options, Eigen::MatrixXd* rate);

// Hamiltonian min_u max_{b,dv,da} p . f at a relative state.
double Hamiltonian(const Subsystem2Params& params, double v, double p_r,
                   double p_v);

// Bang-bang tracker acceleration minimizing the Hamiltonian. A zero
// costate returns `tie`.
inline double OptimalAccel(const Subsystem2Params& params, double p_v,
                           double tie = 0.0) {
  if (p_v > 0.0) return params.accel_min;
  if (p_v < 0.0) return params.accel_max;
  return tie;
}

// Infinite-horizon value iteration V <- max(|r|, V + dt * H) to the
// steady state, then shifted so that {V <= 0} is the controlled-invariant
// set at level min V + margin. Throws SolverError when the iteration cap is
// hit or when the invariant set touches the grid boundary.
ValueFunction2D SolveInvariantSet(const Subsystem2Params& params,
                                  const Grid2& grid,
                                  const SolverOptions& options = {});

// Raises `large`'s level, if needed, so that every grid cell touching
// `small`'s set {V <= 0} lies in `large`'s set. Sublevel sets of an
// invariant value function stay invariant at any level above its minimum.
// Returns the increase applied (0 when already nested).
double RaiseLevelToContain(ValueFunction2D* large, const ValueFunction2D& small);

// Backward reachable tube into `small`'s invariant set under `small`'s
// (slower planner) dynamics, grown until it contains `large`'s invariant
// set. The tube's position projection is the switching safety bound.
ValueFunction2D SolveSsb(const ValueFunction2D& small,
                         const ValueFunction2D& large,
                         const SolverOptions& options = {});

// Largest |r| over cells with V <= 0, rounded outward by one cell.
double ExtractBound(const ValueFunction2D& vf);

struct ValueSample {
  double value = 0.0;
  double d_r = 0.0;
  double d_v = 0.0;
};

// Bilinear interpolation of value and central-difference gradient. Throws
// OutOfDomainError outside the grid.
ValueSample ValueAndGradient(const ValueFunction2D& vf,
                             const RelativeState2& rel);

// Points where the bilinear interpolant crosses zero along grid edges, as
// (r, v) pairs.
std::vector<Eigen::Vector2d> ZeroLevelContour(const ValueFunction2D& vf);

}  // namespace metaplan

#endif  // METAPLAN_REACHABILITY_H_
