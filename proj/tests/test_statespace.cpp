// Copyright 2026 The Koopmanix Authors
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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "koopmanix/error.hpp"
#include "koopmanix/statespace.hpp"
#include "test_support.hpp"

namespace koopmanix {
namespace {

using testing::layout_of;

Trajectory scalar_trajectory(std::initializer_list<double> xs) {
  Trajectory t;
  for (double x : xs) t.states.push_back({Eigen::VectorXd::Constant(1, x), Eigen::VectorXd(0)});
  return t;
}

DemonstrationSet scalar_set(std::vector<Trajectory> trajs) {
  return {layout_of(1, 0), std::move(trajs)};
}

TEST(StateLayout, RejectsBadDimensions) {
  EXPECT_NO_THROW(layout_of(1, 0, 1).check());
  EXPECT_THROW(layout_of(0, 0, 1).check(), Error);
  EXPECT_THROW(layout_of(1, -1, 1).check(), Error);
  EXPECT_THROW(layout_of(1, 0, 0).check(), Error);
  StateLayout named = layout_of(2, 1);
  named.robot_names = {"a"};
  EXPECT_THROW(named.check(), Error);
  named.robot_names = {"a", "b"};
  named.object_names = {"c"};
  EXPECT_NO_THROW(named.check());
}

TEST(CompositeState, StackAndSplitAreInverse) {
  const StateLayout l = layout_of(2, 3);
  Rng rng(4);
  const CompositeState s = testing::random_state(rng, l);
  const Eigen::VectorXd x = s.stacked();
  ASSERT_EQ(x.size(), 5);
  EXPECT_EQ(CompositeState::split(l, x), s);
  EXPECT_TRUE(s.conforms_to(l));
  EXPECT_FALSE(s.conforms_to(layout_of(3, 2)));
}

TEST(Validate, WellFormedSetIsOk) {
  const auto demos = scalar_set({scalar_trajectory({1, 2, 3}), scalar_trajectory({4, 5})});
  EXPECT_TRUE(validate(demos).ok());
}

TEST(Validate, NanIsReportedWithIndices) {
  auto demos = scalar_set({scalar_trajectory({1, 2, 3, 4, 5})});
  demos.trajectories[0].states[3].robot[0] = std::numeric_limits<double>::quiet_NaN();
  const ValidationReport report = validate(demos);
  ASSERT_FALSE(report.ok());
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::kNonFinite);
  EXPECT_EQ(report.violations[0].trajectory, 0);
  EXPECT_EQ(report.violations[0].time, 3);
}

TEST(Validate, LengthOneTrajectoryIsShort) {
  const auto demos = scalar_set({scalar_trajectory({1})});
  const ValidationReport report = validate(demos);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::kShortHorizon);
  EXPECT_NE(report.violations[0].message.find("T < 2"), std::string::npos);
}

TEST(Validate, DimensionAndTorqueCountViolations) {
  auto demos = scalar_set({scalar_trajectory({1, 2, 3})});
  demos.trajectories[0].torques = {Eigen::VectorXd::Zero(1)};
  demos.trajectories[0].states[1].robot = Eigen::VectorXd::Zero(2);
  const ValidationReport report = validate(demos);
  bool dim = false;
  bool torque = false;
  for (const Violation& v : report.violations) {
    dim = dim || (v.kind == ViolationKind::kDimensionMismatch && v.time == 1);
    torque = torque || v.kind == ViolationKind::kTorqueCount;
  }
  EXPECT_TRUE(dim);
  EXPECT_TRUE(torque);
  EXPECT_FALSE(validate(scalar_set({})).ok());
}

TEST(ConsecutivePairs, CountsFollowHorizons) {
  EXPECT_EQ(consecutive_pairs(scalar_set({scalar_trajectory({1, 2, 3})})).size(), 2u);
  const auto demos = scalar_set({scalar_trajectory({1, 2, 3}), scalar_trajectory({4, 5, 6, 7, 8})});
  EXPECT_EQ(consecutive_pairs(demos).size(), 6u);
  EXPECT_EQ(pair_count(demos), 6);
}

TEST(ConsecutivePairs, OrderIsTrajectoryThenTime) {
  const auto demos = scalar_set({scalar_trajectory({10, 11, 12})});
  const auto pairs = consecutive_pairs(demos);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].current.robot[0], 10);
  EXPECT_EQ(pairs[0].next.robot[0], 11);
  EXPECT_EQ(pairs[1].current.robot[0], 11);
  EXPECT_EQ(pairs[1].next.robot[0], 12);
}

TEST(ConsecutivePairs, InvalidSetThrows) {
  EXPECT_THROW(consecutive_pairs(scalar_set({scalar_trajectory({1})})), Error);
}

// Property: pairs never straddle trajectories, their number is Σ(T_n - 1),
// and repeated extraction is identical.
TEST(ConsecutivePairs, PropertyNoBoundaryCrossing) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = 1 + static_cast<int>(rng.index(6));
    DemonstrationSet demos;
    demos.layout = layout_of(1, 1);
    int expected = 0;
    for (int k = 0; k < N; ++k) {
      const int T = 2 + static_cast<int>(rng.index(8));
      expected += T - 1;
      Trajectory traj;
      // Object slot carries the trajectory id, robot slot the time index.
      for (int t = 0; t < T; ++t) {
        traj.states.push_back({Eigen::VectorXd::Constant(1, t), Eigen::VectorXd::Constant(1, k)});
      }
      demos.trajectories.push_back(std::move(traj));
    }
    const auto pairs = consecutive_pairs(demos);
    ASSERT_EQ(static_cast<int>(pairs.size()), expected);
    for (const StatePair& p : pairs) {
      EXPECT_EQ(p.current.object[0], p.next.object[0]);
      EXPECT_EQ(p.current.object[0], p.trajectory);
      EXPECT_EQ(p.next.robot[0], p.current.robot[0] + 1);
    }
    const auto again = consecutive_pairs(demos);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_EQ(&pairs[i].current, &again[i].current);
      EXPECT_EQ(&pairs[i].next, &again[i].next);
    }
  }
}

}  // namespace
}  // namespace koopmanix
