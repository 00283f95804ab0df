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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace metaplan {
namespace {

Environment OneSphere(const Eigen::Vector3d& c, double radius) {
  Environment env({Eigen::Vector3d::Constant(-10), Eigen::Vector3d::Constant(10)},
                  {{c, radius}}, 5.0);
  env.RevealAll();
  return env;
}

TEST(PointBoxDistanceTest, MatchesHandComputedCases) {
  const Eigen::Vector3d e(1.0, 0.5, 0.25);
  EXPECT_DOUBLE_EQ(PointBoxDistance({0, 0, 0}, {0, 0, 0}, e), 0.0);
  EXPECT_DOUBLE_EQ(PointBoxDistance({0.9, -0.4, 0.2}, {0, 0, 0}, e), 0.0);
  EXPECT_DOUBLE_EQ(PointBoxDistance({3, 0, 0}, {0, 0, 0}, e), 2.0);
  // Corner region: 3-4-5 triangle in x and y.
  EXPECT_DOUBLE_EQ(PointBoxDistance({4, 4.5, 0}, {0, 0, 0}, e), 5.0);
  EXPECT_DOUBLE_EQ(PointBoxDistance({1, 1, 1}, {1, 1, 1}, e), 0.0);
}

TEST(EnvironmentTest, RejectsBadInputs) {
  const WorkspaceBox box{Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()};
  EXPECT_THROW(Environment(box, {{Eigen::Vector3d::Zero(), 0.0}}, 1.0),
               ConfigError);
  EXPECT_THROW(Environment(box, {}, -1.0), ConfigError);
  EXPECT_THROW(Environment({Eigen::Vector3d::Ones(), Eigen::Vector3d::Zero()},
                           {}, 1.0),
               ConfigError);
}

TEST(EnvironmentTest, SenseRevealsEachObstacleOnce) {
  Environment env({Eigen::Vector3d::Zero(), Eigen::Vector3d(30, 10, 10)},
                  {{{5, 5, 5}, 1.0}, {{12, 5, 5}, 1.0}, {{20, 5, 5}, 2.0}},
                  3.0);
  EXPECT_TRUE(env.Sense({0.5, 5, 5}).empty());
  // Surface at x = 4, exactly 3 m away: closed ball.
  EXPECT_EQ(env.Sense({1, 5, 5}), std::vector<int>{0});
  EXPECT_TRUE(env.Sense({1, 5, 5}).empty());
  EXPECT_EQ(env.Sense({15.5, 5, 5}), (std::vector<int>{1, 2}));
  EXPECT_EQ(env.known_indices(), (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(env.known(1));
}

TEST(EnvironmentTest, UnknownObstaclesDoNotBlockPlanning) {
  Environment env({Eigen::Vector3d::Constant(-10), Eigen::Vector3d::Constant(10)},
                  {{Eigen::Vector3d::Zero(), 1.0}}, 1.0);
  const SafetyBound bound{Eigen::Vector3d::Constant(0.2)};
  EXPECT_TRUE(SegmentClear({-5, 0, 0}, {5, 0, 0}, bound, env));
  EXPECT_TRUE(InCollision({0, 0, 0}, env));
  env.RevealAll();
  EXPECT_FALSE(SegmentClear({-5, 0, 0}, {5, 0, 0}, bound, env));
}

TEST(EnvironmentTest, InCollisionIsStrictInterior) {
  const Environment env = OneSphere({1, 2, 3}, 1.0);
  EXPECT_TRUE(InCollision({1.5, 2, 3}, env));
  EXPECT_FALSE(InCollision({2.0, 2, 3}, env));
  EXPECT_FALSE(InCollision({3, 3, 3}, env));
}

TEST(EnvironmentTest, WorkspaceShrinksByBound) {
  const Environment env({Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(4)},
                        {}, 1.0);
  const SafetyBound bound{Eigen::Vector3d(0.5, 0.5, 1.0)};
  EXPECT_TRUE(PointClear({0.5, 2, 2}, bound, env));
  EXPECT_FALSE(PointClear({0.4, 2, 2}, bound, env));
  EXPECT_FALSE(PointClear({2, 2, 3.5}, bound, env));
  EXPECT_FALSE(SegmentClear({2, 2, 2}, {2, 2, 3.2}, bound, env));
}

// Brute-force oracle: the swept box meets the sphere iff some densely
// sampled box on the segment does. Near-tangent draws are skipped.
TEST(EnvironmentTest, SegmentClearAgreesWithDenseSampling) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  std::uniform_real_distribution<double> ext(0.05, 1.0);
  std::uniform_real_distribution<double> rad(0.3, 2.0);
  int checked = 0;
  int blocked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector3d c(pos(rng), pos(rng), pos(rng));
    const Environment env = OneSphere(c, rad(rng));
    const SafetyBound bound{Eigen::Vector3d(ext(rng), ext(rng), ext(rng))};
    const Eigen::Vector3d p0(pos(rng), pos(rng), pos(rng));
    const Eigen::Vector3d p1(pos(rng), pos(rng), pos(rng));
    double min_d = INFINITY;
    const int n = 20000;
    for (int k = 0; k <= n; ++k) {
      const Eigen::Vector3d q = p0 + (p1 - p0) * (static_cast<double>(k) / n);
      min_d = std::min(min_d, PointBoxDistance(c, q, bound.extent));
    }
    const double r = env.obstacles()[0].radius;
    if (std::abs(min_d - r) < 2e-3) continue;
    ++checked;
    blocked += min_d <= r;
    EXPECT_EQ(SegmentClear(p0, p1, bound, env), min_d > r) << "trial " << trial;
  }
  EXPECT_GT(checked, 950);
  EXPECT_GT(blocked, 100);
  EXPECT_LT(blocked, checked - 100);
}

TEST(EnvironmentTest, DegenerateSegmentIsPointCheck) {
  const Environment env = OneSphere({0, 0, 0}, 1.0);
  const SafetyBound bound{Eigen::Vector3d::Constant(0.5)};
  const Eigen::Vector3d p(1.6, 0, 0);
  EXPECT_EQ(SegmentClear(p, p, bound, env), PointClear(p, bound, env));
  EXPECT_TRUE(PointClear(p, bound, env));
  EXPECT_FALSE(PointClear({1.4, 0, 0}, bound, env));
}

TEST(SensingTest, MinimumAndValidation) {
  const SafetyBound bound{Eigen::Vector3d(0.3, 0.3, 0.2)};
  const Eigen::Vector3d speed(1.0, 1.0, 0.5);
  const Eigen::Vector3d m = SensingMinimum(bound, speed, 2.0);
  EXPECT_TRUE(m.isApprox(Eigen::Vector3d(2.3, 2.3, 1.2)));
  EXPECT_NO_THROW(ValidateSensingRadius(m.norm() + 1e-9, bound, speed, 2.0));
  EXPECT_THROW(ValidateSensingRadius(m.norm() - 1e-6, bound, speed, 2.0),
               ConfigError);
  EXPECT_THROW(SensingMinimum(bound, speed, -1.0), ConfigError);
}

}  // namespace
}  // namespace metaplan
