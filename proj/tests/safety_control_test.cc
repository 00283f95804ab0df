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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.h"

namespace metaplan {
namespace {

const Precomputed& Suite() { return testing::CoarseSuite().precomputed; }

SafetyController MakeController(int planner) {
  return SafetyController(Suite().tables.teb[planner], TrackingLimits{},
                          LqrController{});
}

// One axis of the relative system under piecewise-constant inputs.
RelativeState2 Step(const RelativeState2& s, double u, double b, double dv,
                    double da, double dt) {
  auto f = [&](const Eigen::Vector2d& y) {
    return Eigen::Vector2d(y[1] - dv - b, u - da);
  };
  const Eigen::Vector2d y = Rk4Step(f, Eigen::Vector2d(s.r, s.v), dt);
  return {y[0], y[1]};
}

// Interior cells of the set, for rollout starts.
std::vector<RelativeState2> SetCells(const ValueFunction2D& vf, int stride) {
  std::vector<RelativeState2> out;
  for (int i = 0; i < vf.grid.nr; i += stride) {
    for (int j = 0; j < vf.grid.nv; j += stride) {
      if (vf.values(i, j) <= 0.0) out.push_back({vf.grid.r(i), vf.grid.v(j)});
    }
  }
  return out;
}

TEST(LqrControllerTest, DefaultGainsAreStable) {
  const LqrController lqr;
  EXPECT_TRUE(lqr.IsStable());
  // s^2 + 3 s + 4 = 0.
  const Eigen::Vector2cd poles = lqr.ClosedLoopPoles(0);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(poles[k].real(), -1.5, 1e-12);
    EXPECT_NEAR(std::abs(poles[k].imag()), std::sqrt(7.0) / 2.0, 1e-12);
  }
  EXPECT_FALSE(LqrController({4, 4, 4}, {-1, 3, 3}).IsStable());
}

TEST(LqrControllerTest, FeedsBackVelocityErrorAgainstPlanner) {
  const LqrController lqr;
  Relative3 rel{};
  rel[0] = {0.1, 0.5};
  const Eigen::Vector3d a = lqr.Accel(rel, Eigen::Vector3d(0.5, 0, 0));
  EXPECT_NEAR(a.x(), -0.4, 1e-12);
}

TEST(SafetyControllerTest, OutputAlwaysWithinAuthority) {
  const SafetyController ctrl = MakeController(0);
  const TrackingLimits limits;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    Relative3 rel;
    for (auto& s : rel) s = {u(rng), u(rng)};
    const SafetyOutput out = ctrl.Control(rel, Eigen::Vector3d(u(rng), u(rng), 0));
    ASSERT_TRUE(limits.Admits(out.command.control));
  }
}

TEST(SafetyControllerTest, NominalDeepInsideBangNearBoundary) {
  const SafetyController ctrl = MakeController(1);
  const ValueFunction2D& vf = *Suite().tables.teb[1][0];
  Eigen::Index bi, bj;
  vf.values.minCoeff(&bi, &bj);
  bool bang = true;
  bool emergency = true;
  double value = 0.0;
  const RelativeState2 core{vf.grid.r(bi), vf.grid.v(bj)};
  ctrl.AxisAccel(0, core, 0.0, &bang, &emergency, &value);
  EXPECT_FALSE(bang);
  EXPECT_FALSE(emergency);
  EXPECT_LT(value, ctrl.BandThreshold(0));
  // A set cell with the largest value is in the band.
  double worst = -1.0;
  RelativeState2 edge;
  for (const RelativeState2& s : SetCells(vf, 1)) {
    const double v = ValueAndGradient(vf, s).value;
    if (v > worst) {
      worst = v;
      edge = s;
    }
  }
  const double a = ctrl.AxisAccel(0, edge, 0.0, &bang, &emergency, &value);
  EXPECT_TRUE(bang);
  EXPECT_TRUE(a == vf.params.accel_min || a == vf.params.accel_max);
}

TEST(SafetyControllerTest, OffGridIsAnEmergencyWithFullAuthority) {
  const SafetyController ctrl = MakeController(0);
  bool bang, emergency;
  double value;
  const double a = ctrl.AxisAccel(0, {2.0, 0.0}, 0.0, &bang, &emergency, &value);
  EXPECT_TRUE(emergency);
  EXPECT_DOUBLE_EQ(a, Suite().tables.teb[0][0]->params.accel_min);
  Relative3 rel{};
  rel[2] = {0.0, -4.0};
  EXPECT_TRUE(ctrl.Control(rel, Eigen::Vector3d::Zero()).emergency);
}

TEST(AdversarialDisturbanceTest, SitsOnVerticesAndBreaksTiesPositive) {
  auto flat = std::make_shared<ValueFunction2D>(*Suite().tables.teb[0][0]);
  flat->values.setZero();
  flat->ComputeGradients();
  const AxisValues values = {flat, flat, flat};
  const DisturbanceBounds bounds;
  const Disturbance6 tie = AdversarialDisturbance(values, Relative3{}, bounds);
  EXPECT_TRUE((tie.velocity.array() == bounds.velocity.array()).all());
  EXPECT_TRUE((tie.acceleration.array() == bounds.acceleration.array()).all());

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Relative3 rel;
    for (auto& s : rel) s = {u(rng), 2 * u(rng)};
    const Disturbance6 d =
        AdversarialDisturbance(Suite().tables.teb[0], rel, bounds);
    EXPECT_TRUE((d.velocity.cwiseAbs().array() == bounds.velocity.array()).all());
    EXPECT_TRUE(
        (d.acceleration.cwiseAbs().array() == bounds.acceleration.array()).all());
  }
}

// The optimal supervisor never lets the adversary (planner and disturbance
// both playing the value gradient) push the state out of its bound.
TEST(SafetyControllerTest, NoEscapeAgainstAdversaryOverTenSeconds) {
  const double dt = 0.01;
  for (int planner = 0; planner < 3; ++planner) {
    const SafetyController ctrl = MakeController(planner);
    for (int axis : {0, 2}) {
      const ValueFunction2D& vf = *Suite().tables.teb[planner][axis];
      const Subsystem2Params& p = vf.params;
      const double bound = ExtractBound(vf);
      const std::vector<RelativeState2> starts = SetCells(vf, 3);
      ASSERT_GT(starts.size(), 10u);
      for (RelativeState2 s : starts) {
        for (int k = 0; k < 1000; ++k) {
          bool bang, emergency;
          double value;
          const ValueSample g = ValueAndGradient(vf, s);
          const double b = g.d_r > 0.0 ? -p.b_max : p.b_max;
          const double u = ctrl.AxisAccel(axis, s, b, &bang, &emergency, &value);
          ASSERT_FALSE(emergency);
          s = Step(s, u, b, g.d_r > 0.0 ? -p.dv_max : p.dv_max,
                   g.d_v > 0.0 ? -p.da_max : p.da_max, dt);
          ASSERT_LE(std::abs(s.r), bound) << "planner " << planner;
        }
      }
    }
  }
}

TEST(SwitchingTest, OutsideTubeThrows) {
  const ValueFunction2D& tube = *Suite().tables.tubes[0][1][0];
  EXPECT_THROW(SwitchingAccel(tube, {1.45, 2.4}), SwitchingError);
  EXPECT_THROW(SwitchingAccel(tube, {5.0, 0.0}), SwitchingError);
}

// From anywhere in the faster set, the switching law reaches the slower
// set within the tube horizon and stays inside the switching bound.
TEST(SwitchingTest, SettlesIntoSlowerSetWithinHorizon) {
  const double dt = 0.01;
  const int from = 0;
  const int to = 2;
  for (int axis : {0, 2}) {
    const ValueFunction2D& tube = *Suite().tables.tubes[from][to][axis];
    const ValueFunction2D& small = *Suite().tables.teb[to][axis];
    const Subsystem2Params& p = small.params;
    const double bound = ExtractBound(tube);
    const std::vector<RelativeState2> starts =
        SetCells(*Suite().tables.teb[from][axis], 3);
    ASSERT_GT(starts.size(), 10u);
    int outside = 0;
    for (RelativeState2 s : starts) {
      if (ValueAndGradient(small, s).value > 0.0) ++outside;
      double t = 0.0;
      while (ValueAndGradient(small, s).value > 0.0) {
        const ValueSample g = ValueAndGradient(tube, s);
        const double u = SwitchingAccel(tube, s);
        s = Step(s, u, g.d_r > 0.0 ? -p.b_max : p.b_max,
                 g.d_r > 0.0 ? -p.dv_max : p.dv_max,
                 g.d_v > 0.0 ? -p.da_max : p.da_max, dt);
        t += dt;
        ASSERT_LE(std::abs(s.r), bound);
        ASSERT_LE(t, tube.horizon + 0.5);
      }
    }
    EXPECT_GT(outside, 0);
  }
}

TEST(SwitchingTest, ControllerHandsAxesOver) {
  const SafetyController target = MakeController(1);
  const SwitchingController sw(Suite().tables.tubes[0][1], &target);
  std::array<bool, 3> handed = {false, false, false};
  Relative3 rel{};
  const SafetyOutput out = sw.Control(rel, Eigen::Vector3d::Zero(), &handed);
  EXPECT_TRUE(handed[0] && handed[1] && handed[2]);
  EXPECT_FALSE(out.emergency);
}

}  // namespace
}  // namespace metaplan
