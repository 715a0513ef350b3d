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
#include <sstream>

#include <gtest/gtest.h>

#include "koopmanix/error.hpp"
#include "koopmanix/koopman.hpp"
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

KoopmanModel scalar_model(double k) {
  return {Eigen::MatrixXd::Constant(1, 1, k), LiftingSpec::identity(layout_of(1, 0)), {}};
}

TEST(Accumulate, DoublingTrajectory) {
  const auto acc = accumulate(scalar_set({scalar_trajectory({1, 2, 4})}),
                              LiftingSpec::identity(layout_of(1, 0)));
  EXPECT_DOUBLE_EQ(acc.A(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(acc.G(0, 0), 2.5);
  EXPECT_EQ(acc.pair_count, 2);
}

TEST(Accumulate, ConstantTrajectory) {
  const auto acc = accumulate(scalar_set({scalar_trajectory({3, 3, 3})}),
                              LiftingSpec::identity(layout_of(1, 0)));
  EXPECT_DOUBLE_EQ(acc.A(0, 0), 9.0);
  EXPECT_DOUBLE_EQ(acc.G(0, 0), 9.0);
}

TEST(Accumulate, DuplicateTrajectoriesRenormalize) {
  const auto spec = LiftingSpec::identity(layout_of(1, 0));
  const auto one = accumulate(scalar_set({scalar_trajectory({1, 2, 4})}), spec);
  const auto two = accumulate(
      scalar_set({scalar_trajectory({1, 2, 4}), scalar_trajectory({1, 2, 4})}), spec);
  EXPECT_DOUBLE_EQ(one.A(0, 0), two.A(0, 0));
  EXPECT_DOUBLE_EQ(one.G(0, 0), two.G(0, 0));
}

TEST(Accumulate, LayoutMismatchAndNonFinite) {
  EXPECT_THROW(accumulate(scalar_set({scalar_trajectory({1, 2})}),
                          LiftingSpec::identity(layout_of(2, 0))),
               Error);
  // Finite states whose cubes overflow.
  auto demos = scalar_set({scalar_trajectory({1e200, 1.0})});
  EXPECT_THROW(accumulate(demos, LiftingSpec::kodex(layout_of(1, 0))), NonFiniteError);
}

TEST(Accumulate, GIsSymmetric) {
  Rng rng(8);
  const StateLayout l = layout_of(3, 2);
  const auto demos = testing::random_demos(rng, l, 7, 2, 20, false);
  const auto acc = accumulate(demos, LiftingSpec::kodex(l));
  EXPECT_LE((acc.G - acc.G.transpose()).cwiseAbs().maxCoeff(), 1e-12 * acc.G.cwiseAbs().maxCoeff());
}

TEST(Accumulate, ParallelMatchesSequential) {
  Rng rng(9);
  const StateLayout l = layout_of(3, 3);
  const auto demos = testing::random_demos(rng, l, 23, 2, 30, false);
  const auto spec = LiftingSpec::kodex(l);
  const auto seq = accumulate(demos, spec, 1);
  for (int threads : {2, 3, 8}) {
    const auto par = accumulate(demos, spec, threads);
    EXPECT_LE((seq.A - par.A).norm(), 1e-10 * seq.A.norm());
    EXPECT_LE((seq.G - par.G).norm(), 1e-10 * seq.G.norm());
    EXPECT_EQ(seq.pair_count, par.pair_count);
  }
  // Sequential accumulation is bit-reproducible.
  const auto again = accumulate(demos, spec, 1);
  EXPECT_EQ(seq.A, again.A);
  EXPECT_EQ(seq.G, again.G);
}

TEST(PseudoInverse, TextbookCases) {
  const auto eye = pseudo_inverse(Eigen::Matrix3d::Identity(), 1e-12);
  EXPECT_EQ(eye.rank, 3);
  EXPECT_LE((eye.matrix - Eigen::Matrix3d::Identity()).norm(), 1e-15);

  const auto diag = pseudo_inverse(Eigen::Vector2d(2, 0).asDiagonal().toDenseMatrix(), 1e-12);
  EXPECT_EQ(diag.rank, 1);
  EXPECT_DOUBLE_EQ(diag.matrix(0, 0), 0.5);
  EXPECT_EQ(diag.matrix(1, 1), 0.0);
}

TEST(PseudoInverse, PenroseConditions) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd G = testing::random_matrix(rng, 5, 5);
    const Eigen::MatrixXd P = pseudo_inverse(G, default_pinv_tolerance(5)).matrix;
    EXPECT_LE((P * G * P - P).norm(), 1e-10 * std::max(1.0, P.norm()));
    EXPECT_LE((G * P * G - G).norm(), 1e-10);
    EXPECT_LE((G * P - (G * P).transpose()).norm(), 1e-10);
    EXPECT_LE((P * G - (P * G).transpose()).norm(), 1e-10);
  }
}

TEST(PseudoInverse, RejectsNonFinite) {
  Eigen::Matrix2d G = Eigen::Matrix2d::Identity();
  G(0, 1) = std::nan("");
  EXPECT_THROW(pseudo_inverse(G, 1e-12), Error);
}

TEST(Fit, DoublingAndConstant) {
  const auto spec = LiftingSpec::identity(layout_of(1, 0));
  EXPECT_NEAR(fit(scalar_set({scalar_trajectory({1, 2, 4})}), spec).K(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(fit(scalar_set({scalar_trajectory({3, 3, 3})}), spec).K(0, 0), 1.0, 1e-14);
}

TEST(Fit, RecoversRotation) {
  Rng rng(11);
  const StateLayout l = layout_of(2, 0);
  const Eigen::Matrix2d R = testing::rotation(0.1);
  const auto demos = testing::linear_demos(rng, l, R, 3, 10);
  const auto model = fit(demos, LiftingSpec::identity(l));
  EXPECT_LT((model.K - R).norm(), 1e-10);
  EXPECT_EQ(model.meta.rank, 2);
  EXPECT_EQ(model.meta.total_pairs, 27);
  EXPECT_EQ(model.meta.n_demos, 3);
}

TEST(Fit, EmptyPairSetThrows) {
  DemonstrationSet demos{layout_of(1, 0), {}};
  EXPECT_THROW(fit(demos, LiftingSpec::identity(layout_of(1, 0))), Error);
}

TEST(Fit, DiagnosticsLine) {
  std::ostringstream diag;
  FitOptions options;
  options.diagnostics = &diag;
  fit(scalar_set({scalar_trajectory({1, 2, 4})}), LiftingSpec::identity(layout_of(1, 0)), options);
  const std::string line = diag.str();
  for (const char* key : {"pairs=2", "p=1", "rank=1", "wall_time_s="}) {
    EXPECT_NE(line.find(key), std::string::npos) << line;
  }
}

TEST(Fit, ScaleInvarianceOfWeights) {
  Rng rng(12);
  const StateLayout l = layout_of(2, 1);
  const auto demos = testing::random_demos(rng, l, 6, 5, 12, false);
  const auto spec = LiftingSpec::kodex(l);
  const auto acc = accumulate(demos, spec);
  FitAccumulators scaled = acc;
  scaled.A *= 7.5;
  scaled.G *= 7.5;
  const double tol = default_pinv_tolerance(dimension(spec));
  const Eigen::MatrixXd K1 = operator_from_accumulators(acc, tol);
  const Eigen::MatrixXd K2 = operator_from_accumulators(scaled, tol);
  EXPECT_LE((K1 - K2).norm(), 1e-12 * std::max(1.0, K1.norm()) * 1e3);
}

TEST(Fit, ExactRecoveryOfStableLinearSystem) {
  Rng rng(13);
  const StateLayout l = layout_of(3, 2);
  const Eigen::MatrixXd M = testing::random_stable(rng, 5, 0.95);
  const auto model = fit(testing::linear_demos(rng, l, M, 4, 20), LiftingSpec::identity(l));
  EXPECT_LT((model.K - M).norm(), 1e-8);
}

TEST(Fit, MatchesStackedQrOracle) {
  Rng rng(14);
  const StateLayout l = layout_of(2, 2);
  const auto spec = LiftingSpec::kodex(l);
  const auto demos = testing::random_demos(rng, l, 9, 20, 40, false);
  const auto model = fit(demos, spec);
  const Eigen::MatrixXd oracle = testing::stacked_qr_oracle(
      demos, dimension(spec), [&](const CompositeState& s) { return lift(spec, s).values; });
  EXPECT_EQ(model.meta.rank, dimension(spec));
  EXPECT_LT((model.K - oracle).norm(), 1e-8);
}

TEST(Cost, HandValues) {
  const auto demos = scalar_set({scalar_trajectory({1, 2, 4})});
  EXPECT_DOUBLE_EQ(cost(scalar_model(0.0), demos), 10.0);
  EXPECT_DOUBLE_EQ(cost(scalar_model(1.0), scalar_set({scalar_trajectory({3, 3})})), 0.0);
  EXPECT_THROW(cost(scalar_model(1.0), DemonstrationSet{layout_of(2, 0), {}}), Error);
}

TEST(Cost, ResidualFreeFit) {
  Rng rng(15);
  const StateLayout l = layout_of(2, 0);
  const auto demos = testing::linear_demos(rng, l, testing::rotation(0.3), 5, 30);
  const auto model = fit(demos, LiftingSpec::identity(l));
  EXPECT_LT(cost(model, demos), 1e-18 * pair_count(demos));
}

// Property: no random perturbation of the fitted operator lowers the cost.
TEST(Cost, PropertyLeastSquaresOptimality) {
  Rng rng(16);
  const StateLayout l = layout_of(2, 1);
  const auto demos = testing::random_demos(rng, l, 5, 30, 30, false);
  const auto model = fit(demos, LiftingSpec::kodex(l));
  const double best = cost(model, demos);
  for (int k = 0; k < 200; ++k) {
    Eigen::MatrixXd delta = testing::random_matrix(rng, model.p(), model.p());
    delta /= delta.norm();
    KoopmanModel moved = model;
    moved.K += 1e-3 * delta;
    EXPECT_LE(best, cost(moved, demos));
  }
}

TEST(PredictStep, Basics) {
  const auto m = scalar_model(2.0);
  ObservableVector g{Eigen::VectorXd::Constant(1, 3.0), "identity"};
  EXPECT_EQ(predict_step(m, g).values[0], 6.0);

  KoopmanModel eye{Eigen::MatrixXd::Identity(3, 3), LiftingSpec::identity(layout_of(3, 0)), {}};
  ObservableVector v{Eigen::Vector3d(1, -2, 5), "identity"};
  EXPECT_EQ(predict_step(eye, v).values, v.values);
  EXPECT_THROW(predict_step(eye, g), Error);

  KoopmanModel rot{testing::rotation(0.2), LiftingSpec::identity(layout_of(2, 0)), {}};
  ObservableVector x{Eigen::Vector2d(0.3, -0.7), "identity"};
  const Eigen::VectorXd twice = predict_step(rot, predict_step(rot, x)).values;
  EXPECT_LE((twice - rot.K * rot.K * x.values).norm(), 1e-15);
}

TEST(Rollout, IdentityAndGeometric) {
  KoopmanModel eye{Eigen::MatrixXd::Identity(3, 3), LiftingSpec::identity(layout_of(2, 1)), {}};
  const CompositeState x1{Eigen::Vector2d(0.5, -1), Eigen::VectorXd::Constant(1, 2)};
  const Reference r = rollout(eye, x1, 5);
  ASSERT_EQ(r.horizon(), 5);
  for (const auto& x : r.robot) EXPECT_EQ(x, x1.robot);

  const Reference g = rollout(scalar_model(2.0), {Eigen::VectorXd::Constant(1, 1), Eigen::VectorXd(0)}, 4);
  std::vector<double> values;
  for (const auto& x : g.robot) values.push_back(x[0]);
  EXPECT_EQ(values, (std::vector<double>{1, 2, 4, 8}));
}

TEST(Rollout, RotationMatchesClosedForm) {
  Rng rng(17);
  const StateLayout l = layout_of(2, 0);
  const Eigen::Matrix2d R = testing::rotation(0.1);
  const auto model = fit(testing::linear_demos(rng, l, R, 3, 10), LiftingSpec::identity(l));
  const CompositeState x1{Eigen::Vector2d(0.8, -0.3), Eigen::VectorXd(0)};
  const Reference ref = rollout(model, x1, 100);
  Eigen::Vector2d x = x1.robot;
  for (int t = 0; t < 100; ++t) {
    EXPECT_LT((ref.robot[t] - x).norm(), 1e-8) << "t=" << t;
    x = R * x;
  }
}

TEST(Rollout, LinearEqualsIteratedPredictStep) {
  Rng rng(18);
  const StateLayout l = layout_of(2, 2);
  const auto spec = LiftingSpec::kodex(l);
  const auto model = fit(testing::random_demos(rng, l, 4, 10, 10, false), spec);
  const CompositeState x1 = testing::random_state(rng, l, 0.5);
  const Reference ref = rollout(model, x1, 12);
  ObservableVector g = lift(spec, x1);
  const IndexRange rs = robot_slice(spec);
  for (int t = 0; t < 12; ++t) {
    EXPECT_EQ(ref.robot[t], g.values.segment(rs.begin, rs.size()));
    g = predict_step(model, g);
  }
}

TEST(Rollout, ReliftStartsFromInitialState) {
  Rng rng(19);
  const StateLayout l = layout_of(1, 2);
  const auto spec = LiftingSpec::kodex(l);
  const auto model = fit(testing::random_demos(rng, l, 4, 10, 10, false), spec);
  const CompositeState x1 = testing::random_state(rng, l, 0.5);
  const Reference lin = rollout(model, x1, 6, RolloutMode::kLinear);
  const Reference rel = rollout(model, x1, 6, RolloutMode::kRelift);
  EXPECT_EQ(rel.robot[0], x1.robot);
  EXPECT_EQ(rel.robot[1], lin.robot[1]);
  // Re-lifting after the first step generally departs from pure propagation.
  EXPECT_NE(rel.robot[3], lin.robot[3]);
}

TEST(Rollout, NonFiniteNamesStep) {
  const auto model = scalar_model(1e200);
  try {
    rollout(model, {Eigen::VectorXd::Constant(1, 1e200), Eigen::VectorXd(0)}, 5);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.step(), 2);
  }
  EXPECT_THROW(rollout(model, {Eigen::VectorXd::Constant(2, 1), Eigen::VectorXd(0)}, 3), Error);
}

TEST(RolloutMode, StringRoundTrip) {
  EXPECT_EQ(rollout_mode_from_string(to_string(RolloutMode::kRelift)), RolloutMode::kRelift);
  EXPECT_THROW(rollout_mode_from_string("nope"), Error);
}

}  // namespace
}  // namespace koopmanix
