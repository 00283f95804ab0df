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

#ifndef METAPLAN_ANALYTIC_INVARIANT_SET_H_
#define METAPLAN_ANALYTIC_INVARIANT_SET_H_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "metaplan/dynamics.h"

namespace metaplan {

// Closed-form controlled-invariant set of the double-integrator relative
// subsystem. With W = b_max + dv_max and net braking accelerations a_down
// (for positive v) and a_up (for negative v), the set at level R is
//
//   |r| <= R,
//   r + (v + W)^2 / (2 a_down) <= R   whenever v >= -W,
//   r - (v - W)^2 / (2 a_up)   >= -R  whenever v <=  W.
//
// Each inequality is the stopping distance under worst-case drift with full
// opposing effort. The set is non-empty and invariant iff
// R >= W^2 / min(a_up, a_down); at that minimal level the two parabolic
// arcs meet at (R, -W) and (-R, W).
class AnalyticInvariantSet {
 public:
  // Throws std::invalid_argument when the net acceleration is not positive
  // or when `level` is below the minimal level.
  static AnalyticInvariantSet Create(const Subsystem2Params& params,
                                     std::optional<double> level = {});

  static double MinimalLevel(const Subsystem2Params& params);

  const Subsystem2Params& params() const { return params_; }
  double level() const { return level_; }

  // Worst-case sup_t |r(t)| under optimal play, i.e. the smallest level
  // whose set contains (r, v).
  double Value(double r, double v) const;
  bool Contains(double r, double v) const { return Value(r, v) <= level_; }

  // Dense sampling of the set boundary as (r, v) points.
  std::vector<Eigen::Vector2d> Boundary(int samples_per_arc = 2000) const;

 private:
  AnalyticInvariantSet(const Subsystem2Params& params, double level)
      : params_(params), level_(level) {}

  Subsystem2Params params_;
  double level_;
};

}  // namespace metaplan

#endif  // METAPLAN_ANALYTIC_INVARIANT_SET_H_
