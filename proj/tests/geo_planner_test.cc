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


#include "metaplan/geo_planner.h"

#include <random>

#include <gtest/gtest.h>

namespace metaplan {
namespace {

const PlannerSpeed kSpeed(Eigen::Vector3d(1.0, 0.5, 0.25));

TEST(ProfileEdgeTest, DurationIsSlowestAxis) {
  const TimedTrajectory t = ProfileEdge({0, 0, 0}, {2, -1, 1}, kSpeed, 3);
  EXPECT_DOUBLE_EQ(t.duration(), 4.0);
  EXPECT_EQ(t.planner_id(), 3);
  EXPECT_TRUE(t.end().isApprox(Eigen::Vector3d(2, -1, 1)));
  // Two axes arrive together at 2 s.
  EXPECT_EQ(t.times(), (std::vector<double>{0.0, 2.0, 4.0}));
  EXPECT_DOUBLE_EQ(t.duration(),
                   TravelTimeLowerBound({0, 0, 0}, {2, -1, 1}, kSpeed));
}

TEST(ProfileEdgeTest, RespectsSpeedsAndIsContinuous) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng));
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    const TimedTrajectory t = ProfileEdge(a, b, kSpeed, 0);
    EXPECT_NEAR(t.duration(), TravelTimeLowerBound(a, b, kSpeed), 1e-12);
    const int n = 400;
    Eigen::Vector3d prev = t.Evaluate(0.0).position;
    EXPECT_TRUE(prev.isApprox(a));
    for (int k = 1; k <= n; ++k) {
      const double s = t.duration() * k / n;
      const TrajectorySample q = t.Evaluate(s);
      ASSERT_TRUE((q.velocity.cwiseAbs().array() <=
                   kSpeed.max_speed().array() + 1e-12)
                      .all());
      ASSERT_TRUE(((q.position - prev).cwiseAbs().array() <=
                   kSpeed.max_speed().array() * (t.duration() / n) + 1e-9)
                      .all());
      prev = q.position;
    }
    EXPECT_TRUE(prev.isApprox(b, 1e-12));
    EXPECT_TRUE(t.Evaluate(t.duration() + 1.0).velocity.isZero());
  }
}

TEST(TimedTrajectoryTest, RejectsBadTimes) {
  EXPECT_THROW(TimedTrajectory({0.5, 1.0}, {{0, 0, 0}, {1, 0, 0}}, 0),
               std::invalid_argument);
  EXPECT_THROW(TimedTrajectory({0.0, 0.0}, {{0, 0, 0}, {1, 0, 0}}, 0),
               std::invalid_argument);
  EXPECT_THROW(TimedTrajectory({0.0, 1.0}, {{0, 0, 0}}, 0),
               std::invalid_argument);
}

TEST(TimedTrajectoryTest, TruncatedAndReversed) {
  const TimedTrajectory t = ProfileEdge({0, 0, 0}, {2, -1, 1}, kSpeed, 1);
  const TimedTrajectory head = t.Truncated(3.0);
  EXPECT_DOUBLE_EQ(head.duration(), 3.0);
  EXPECT_TRUE(head.end().isApprox(t.Evaluate(3.0).position));
  for (double s : {0.0, 1.0, 2.5, 3.0}) {
    EXPECT_TRUE(head.Evaluate(s).position.isApprox(t.Evaluate(s).position));
  }
  const TimedTrajectory back = t.Reversed();
  EXPECT_DOUBLE_EQ(back.duration(), t.duration());
  for (double s : {0.0, 1.3, 2.0, 4.0}) {
    EXPECT_TRUE(back.Evaluate(s).position.isApprox(
        t.Evaluate(t.duration() - s).position, 1e-12));
  }
  EXPECT_EQ(back.planner_id(), 1);
}

TEST(PlanEdgeTest, BlockedByKnownObstacleOnly) {
  Environment env({Eigen::Vector3d::Constant(-10), Eigen::Vector3d::Constant(10)},
                  {{{2, 0, 0}, 0.5}}, 1.0);
  const PlannerSpec spec{kSpeed, {Eigen::Vector3d::Constant(0.2)}};
  EXPECT_TRUE(PlanEdge({0, 0, 0}, {4, 0, 0}, spec, env, 0).has_value());
  env.RevealAll();
  EXPECT_FALSE(PlanEdge({0, 0, 0}, {4, 0, 0}, spec, env, 0).has_value());
  // Passes beside it with the bound clear.
  EXPECT_TRUE(PlanEdge({0, 1, 0}, {4, 1, 0}, spec, env, 0).has_value());
  EXPECT_FALSE(PlanEdge({0, 0.6, 0}, {4, 0.6, 0}, spec, env, 0).has_value());
}

}  // namespace
}  // namespace metaplan
