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

#include "metaplan/analytic_invariant_set.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace metaplan {

double AnalyticInvariantSet::MinimalLevel(const Subsystem2Params& p) {
  const double a = std::min(p.NetAccelUp(), p.NetAccelDown());
  if (a <= 0.0) {
    throw std::invalid_argument("net braking acceleration must be positive");
  }
  return p.Drift() * p.Drift() / a;
}

AnalyticInvariantSet AnalyticInvariantSet::Create(
    const Subsystem2Params& params, std::optional<double> level) {
  const double minimal = MinimalLevel(params);
  const double r = level.value_or(minimal);
  if (r < minimal * (1.0 - 1e-12)) {
    throw std::invalid_argument("level below the minimal invariant level");
  }
  return AnalyticInvariantSet(params, r);
}

double AnalyticInvariantSet::Value(double r, double v) const {
  const double w = params_.Drift();
  double value = std::max(MinimalLevel(params_), std::abs(r));
  if (v >= -w) {
    value = std::max(value,
                     r + (v + w) * (v + w) / (2.0 * params_.NetAccelDown()));
  }
  if (v <= w) {
    value = std::max(value,
                     -r + (v - w) * (v - w) / (2.0 * params_.NetAccelUp()));
  }
  return value;
}

std::vector<Eigen::Vector2d> AnalyticInvariantSet::Boundary(
    int samples_per_arc) const {
  const double w = params_.Drift();
  const double a_dn = params_.NetAccelDown();
  const double a_up = params_.NetAccelUp();
  auto upper = [&](double v) {
    return v >= -w ? level_ - (v + w) * (v + w) / (2.0 * a_dn) : level_;
  };
  auto lower = [&](double v) {
    return v <= w ? -level_ + (v - w) * (v - w) / (2.0 * a_up) : -level_;
  };
  // Velocity extent: where the lower arc reaches r = R (v < -W side) and
  // where the upper arc reaches r = -R (v > W side).
  const double v_lo = w - std::sqrt(4.0 * a_up * level_);
  const double v_hi = -w + std::sqrt(4.0 * a_dn * level_);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(2 * samples_per_arc + 2);
  for (int k = 0; k <= samples_per_arc; ++k) {
    const double v = v_lo + (v_hi - v_lo) * k / samples_per_arc;
    const double hi = upper(v);
    const double lo = lower(v);
    if (hi < lo) continue;
    pts.emplace_back(hi, v);
    pts.emplace_back(lo, v);
  }
  return pts;
}

}  // namespace metaplan
