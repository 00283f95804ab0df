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
#include <random>

#include <gtest/gtest.h>

namespace metaplan {
namespace {

Subsystem2Params XAxis(double b) {
  return SubsystemForAxis(TrackingLimits{}, DisturbanceBounds{}, Axis::kX, b);
}

// Largest r reached when the planner and disturbance drift r upward at W
// while the tracker brakes with everything it has, by explicit stepping.
double SimulatedOvershoot(double r, double v, double drift, double brake,
                          double sign) {
  const double dt = 1e-5;
  double peak = sign * r;
  double x = sign * r;
  double u = sign * v;
  while (u + drift > 0.0) {
    x += dt * (u + drift);
    u -= dt * brake;
    peak = std::max(peak, x);
  }
  return peak;
}

TEST(AnalyticInvariantSetTest, MinimalLevelIsDriftSquaredOverBraking) {
  const Subsystem2Params p = XAxis(1.0);
  const double w = 1.1;
  const double a = 9.81 * std::tan(0.15) - 0.1;
  EXPECT_NEAR(AnalyticInvariantSet::MinimalLevel(p), w * w / a, 1e-12);
  EXPECT_THROW(AnalyticInvariantSet::Create(p, 0.5 * w * w / a),
               std::invalid_argument);
}

TEST(AnalyticInvariantSetTest, ValueMatchesWorstCaseStoppingOracle) {
  const Subsystem2Params p = XAxis(0.5);
  const AnalyticInvariantSet set = AnalyticInvariantSet::Create(p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(-1.5, 1.5);
  std::uniform_real_distribution<double> uv(-2.5, 2.5);
  for (int i = 0; i < 200; ++i) {
    const double r = ur(rng);
    const double v = uv(rng);
    const double oracle = std::max(
        {std::abs(r), SimulatedOvershoot(r, v, p.Drift(), p.NetAccelDown(), 1.0),
         SimulatedOvershoot(r, v, p.Drift(), p.NetAccelUp(), -1.0),
         AnalyticInvariantSet::MinimalLevel(p)});
    EXPECT_NEAR(set.Value(r, v), oracle, 1e-3) << "r=" << r << " v=" << v;
  }
}

TEST(AnalyticInvariantSetTest, BoundaryPointsSitOnTheLevel) {
  for (double b : {0.25, 0.5, 1.0}) {
    const Subsystem2Params p = XAxis(b);
    const double level = 1.2 * AnalyticInvariantSet::MinimalLevel(p);
    const AnalyticInvariantSet set = AnalyticInvariantSet::Create(p, level);
    for (const Eigen::Vector2d& q : set.Boundary(500)) {
      EXPECT_NEAR(set.Value(q[0], q[1]), level, 1e-9);
    }
    EXPECT_TRUE(set.Contains(0.0, 0.0));
    EXPECT_FALSE(set.Contains(level + 0.01, 0.0));
  }
}

// Bang-bang braking toward whichever arc is closer keeps the state inside
// the set against randomly switching worst-case inputs.
TEST(AnalyticInvariantSetTest, SetIsInvariantUnderBrakingPolicy) {
  const Subsystem2Params p = XAxis(1.0);
  const double level = 1.1 * AnalyticInvariantSet::MinimalLevel(p);
  const AnalyticInvariantSet set = AnalyticInvariantSet::Create(p, level);
  const double w = p.Drift();
  std::mt19937_64 rng(13);
  std::bernoulli_distribution coin(0.5);
  const std::vector<Eigen::Vector2d> starts = set.Boundary(50);
  double worst = 0.0;
  for (const Eigen::Vector2d& s0 : starts) {
    double r = s0[0];
    double v = s0[1];
    const double dt = 1e-3;
    for (int k = 0; k < 5000; ++k) {
      const double up = v >= -w ? r + (v + w) * (v + w) / (2 * p.NetAccelDown())
                                : r;
      const double lo = v <= w ? -r + (v - w) * (v - w) / (2 * p.NetAccelUp())
                               : -r;
      const double u = up >= lo ? p.accel_min : p.accel_max;
      const double drift = coin(rng) ? w : -w;
      const double da = coin(rng) ? p.da_max : -p.da_max;
      r += dt * (v + drift);
      v += dt * (u - da);
      worst = std::max(worst, set.Value(r, v));
    }
  }
  EXPECT_LE(worst, level + 5e-3);
}

}  // namespace
}  // namespace metaplan
