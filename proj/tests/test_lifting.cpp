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
#include <set>

#include <gtest/gtest.h>

#include "koopmanix/error.hpp"
#include "koopmanix/lifting.hpp"
#include "test_support.hpp"

namespace koopmanix {
namespace {

using testing::layout_of;

CompositeState state(std::vector<double> robot, std::vector<double> object) {
  return {Eigen::Map<Eigen::VectorXd>(robot.data(), robot.size()),
          Eigen::Map<Eigen::VectorXd>(object.data(), object.size())};
}

TEST(Dimension, IdentityAndKodex) {
  EXPECT_EQ(dimension(LiftingSpec::identity(layout_of(3, 2))), 5);
  EXPECT_EQ(dimension(LiftingSpec::kodex(layout_of(2, 1))), 10);
  EXPECT_EQ(dimension(LiftingSpec::kodex(layout_of(30, 12))), 759);
  // i != j only in the object cubic block.
  EXPECT_EQ(dimension(LiftingSpec::kodex(layout_of(2, 1), ObjectCubicPairs::kDistinct)), 9);
}

TEST(Lift, IdentityPassesThrough) {
  const auto g = lift(LiftingSpec::identity(layout_of(2, 0)), state({1, 2}, {}));
  EXPECT_EQ(g.values, Eigen::Vector2d(1, 2));
  EXPECT_EQ(g.spec_id, "identity");
}

TEST(Lift, KodexHandEnumeration) {
  const auto g = lift(LiftingSpec::kodex(layout_of(2, 1)), state({1, 2}, {3}));
  Eigen::VectorXd expected(10);
  expected << 1, 2, 1, 2, 4, 1, 8, 3, 9, 27;
  EXPECT_EQ(g.values, expected);
}

TEST(Lift, KodexZeroInput) {
  const auto g = lift(LiftingSpec::kodex(layout_of(2, 1)), state({0, 0}, {0}));
  EXPECT_EQ(g.values, Eigen::VectorXd::Zero(10));
}

TEST(Lift, WrongDimensionsThrow) {
  EXPECT_THROW(lift(LiftingSpec::kodex(layout_of(2, 1)), state({1}, {3})), Error);
}

TEST(Slices, RobotAndObject) {
  EXPECT_EQ(robot_slice(LiftingSpec::kodex(layout_of(2, 1))), (IndexRange{0, 2}));
  EXPECT_EQ(robot_slice(LiftingSpec::identity(layout_of(5, 0))), (IndexRange{0, 5}));
  EXPECT_EQ(robot_slice(LiftingSpec::kodex(layout_of(30, 12))), (IndexRange{0, 30}));
  EXPECT_EQ(object_slice(LiftingSpec::kodex(layout_of(2, 1))), (IndexRange{7, 8}));
  EXPECT_EQ(object_slice(LiftingSpec::identity(layout_of(3, 2))), (IndexRange{3, 5}));
  EXPECT_TRUE(object_slice(LiftingSpec::kodex(layout_of(4, 0))).empty());
}

TEST(Lift, OrderingTagsDistinguishConventions) {
  const StateLayout l = layout_of(2, 2);
  EXPECT_NE(LiftingSpec::kodex(l).ordering_tag(),
            LiftingSpec::kodex(l, ObjectCubicPairs::kDistinct).ordering_tag());
  EXPECT_NE(LiftingSpec::kodex(l).ordering_tag(), LiftingSpec::identity(l).ordering_tag());
}

TEST(Lift, MonomialListEvaluatesExponents) {
  const StateLayout l = layout_of(1, 1);
  const auto spec = LiftingSpec::monomial_list(l, {{1, 0}, {0, 1}, {2, 1}, {0, 0}});
  const auto g = lift(spec, state({2}, {3}));
  EXPECT_EQ(g.values, Eigen::Vector4d(2, 3, 12, 1));
  EXPECT_EQ(robot_slice(spec), (IndexRange{0, 1}));
  EXPECT_THROW(robot_slice(LiftingSpec::monomial_list(l, {{0, 1}, {1, 0}})), Error);
}

// Property: the enumerated observables, in order, reproduce lift() and the
// dimension, for both cubic conventions and random small layouts.
TEST(Lift, PropertyMatchesNaiveEnumerator) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(8));
    const int m = static_cast<int>(rng.index(9));
    const bool distinct = rng.index(2) == 1;
    const StateLayout l = layout_of(n, m);
    const auto spec = LiftingSpec::kodex(l, distinct ? ObjectCubicPairs::kDistinct
                                                     : ObjectCubicPairs::kAllOrdered);
    const auto monos = testing::enumerate_kodex_monomials(n, m, distinct);
    const CompositeState s = testing::random_state(rng, l, 2.0);
    const Eigen::VectorXd g = lift(spec, s).values;
    ASSERT_EQ(dimension(spec), static_cast<int>(monos.size()));
    ASSERT_EQ(g.size(), dimension(spec));
    const Eigen::VectorXd x = s.stacked();
    for (std::size_t k = 0; k < monos.size(); ++k) {
      const double naive = testing::evaluate_monomial(monos[k], x);
      EXPECT_LE(std::abs(g[k] - naive), 1e-12 * std::max(1.0, std::abs(naive)));
    }
  }
}

// Property: each unordered quadratic pair appears once.
TEST(Lift, QuadraticPairsAreUnique) {
  const auto monos = testing::enumerate_kodex_monomials(6, 5, false);
  std::set<std::vector<int>> seen(monos.begin(), monos.end());
  EXPECT_EQ(seen.size(), monos.size());
  const auto spec = LiftingSpec::kodex(layout_of(6, 5));
  EXPECT_EQ(dimension(spec), static_cast<int>(monos.size()));
}

// Property: the pass-through slots return the raw state bit for bit.
TEST(Lift, PropertyRetrievalIdentity) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const StateLayout l = layout_of(1 + static_cast<int>(rng.index(8)), static_cast<int>(rng.index(9)));
    const auto spec = LiftingSpec::kodex(l);
    const CompositeState s = testing::random_state(rng, l, 1e3);
    const Eigen::VectorXd g = lift(spec, s).values;
    const IndexRange r = robot_slice(spec);
    const IndexRange o = object_slice(spec);
    EXPECT_EQ(g.segment(r.begin, r.size()), s.robot);
    EXPECT_EQ(g.segment(o.begin, o.size()), s.object);
    EXPECT_EQ(retrieve_state(spec, g), s);
  }
}

}  // namespace
}  // namespace koopmanix
