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

#include "koopmanix/koopman.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "koopmanix/error.hpp"

namespace koopmanix {
namespace {

void check_spec_matches(const LiftingSpec& spec, const StateLayout& layout) {
  if (spec.layout().n != layout.n || spec.layout().m != layout.m) {
    throw Error(ErrorCode::kLayoutMismatch,
                "lifting layout does not match the demonstration layout");
  }
}

// Weighted sums over trajectories [first, last).
FitAccumulators accumulate_range(const DemonstrationSet& demos,
                                 const LiftingSpec& spec, int first, int last) {
  const int p = dimension(spec);
  const double n_demos = static_cast<double>(demos.size());
  FitAccumulators acc{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p),
                      0};
  Eigen::MatrixXd traj_a(p, p);
  Eigen::MatrixXd traj_g(p, p);
  Eigen::VectorXd current(p);
  Eigen::VectorXd next(p);

  for (int i = first; i < last; ++i) {
    const auto& states = demos.trajectories[i].states;
    const int steps = static_cast<int>(states.size()) - 1;
    traj_a.setZero();
    traj_g.setZero();
    lift_into(spec, states[0], current);
    if (!current.allFinite()) {
      throw NonFiniteError(1, "non-finite lifted value in trajectory " +
                                  std::to_string(i) + " at t=1");
    }
    for (int t = 0; t < steps; ++t) {
      lift_into(spec, states[t + 1], next);
      if (!next.allFinite()) {
        throw NonFiniteError(t + 2, "non-finite lifted value in trajectory " +
                                        std::to_string(i) +
                                        " at t=" + std::to_string(t + 2));
      }
      traj_a.noalias() += next * current.transpose();
      traj_g.noalias() += current * current.transpose();
      std::swap(current, next);
    }
    const double weight = 1.0 / (n_demos * steps);
    acc.A += weight * traj_a;
    acc.G += weight * traj_g;
    acc.pair_count += steps;
  }
  return acc;
}

}  // namespace

FitAccumulators accumulate(const DemonstrationSet& demos,
                           const LiftingSpec& spec, int threads) {
  require_valid(demos);
  check_spec_matches(spec, demos.layout);

  const int count = demos.size();
  threads = std::clamp(threads, 1, count);
  if (threads == 1) return accumulate_range(demos, spec, 0, count);

  std::vector<FitAccumulators> partial(threads);
  std::vector<std::exception_ptr> failures(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      const int first = count * w / threads;
      const int last = count * (w + 1) / threads;
      workers.emplace_back([&, w, first, last] {
        try {
          partial[w] = accumulate_range(demos, spec, first, last);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  FitAccumulators acc = std::move(partial[0]);
  for (int w = 1; w < threads; ++w) {
    acc.A += partial[w].A;
    acc.G += partial[w].G;
    acc.pair_count += partial[w].pair_count;
  }
  return acc;
}

double default_pinv_tolerance(int p) {
  return std::numeric_limits<double>::epsilon() * std::max(p, 1);
}

PseudoInverse pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                             double rel_tolerance) {
  if (!matrix.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "pseudo_inverse: non-finite input");
  }
  if (!(rel_tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "pseudo_inverse: tolerance must be non-negative");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::kFitFailure, "SVD did not converge");
  }

  PseudoInverse result;
  result.singular_values = svd.singularValues();
  const auto& sigma = result.singular_values;
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  const double cutoff = rel_tolerance * sigma_max;

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff && sigma[i] > 0.0) {
      inv[i] = 1.0 / sigma[i];
      ++result.rank;
    }
  }
  result.matrix =
      svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  result.condition_number =
      result.rank > 0 ? sigma_max / sigma[result.rank - 1] : 0.0;
  if (!result.matrix.allFinite()) {
    throw Error(ErrorCode::kFitFailure, "pseudo_inverse produced non-finite values");
  }
  return result;
}

Eigen::MatrixXd operator_from_accumulators(const FitAccumulators& acc,
                                           double rel_tolerance,
                                           PseudoInverse* pinv_out) {
  PseudoInverse pinv = pseudo_inverse(acc.G, rel_tolerance);
  Eigen::MatrixXd K = acc.A * pinv.matrix;
  if (pinv_out != nullptr) *pinv_out = std::move(pinv);
  return K;
}

KoopmanModel fit(const DemonstrationSet& demos, const LiftingSpec& spec,
                 const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (pair_count(demos) == 0) {
    throw Error(ErrorCode::kEmptyInput, "fit: no consecutive state pairs");
  }
  FitAccumulators acc = accumulate(demos, spec, options.threads);
  const int p = dimension(spec);
  const double tol = options.rel_tolerance.value_or(default_pinv_tolerance(p));

  PseudoInverse pinv;
  Eigen::MatrixXd K = operator_from_accumulators(acc, tol, &pinv);
  if (!K.allFinite()) {
    throw Error(ErrorCode::kFitFailure, "fit produced a non-finite operator");
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  KoopmanModel model{std::move(K), spec,
                     FitMeta{demos.size(), acc.pair_count, elapsed, pinv.rank,
                             pinv.condition_number, tol}};
  if (options.diagnostics != nullptr) {
    *options.diagnostics << "fit: pairs=" << model.meta.total_pairs
                         << " p=" << p << " rank=" << model.meta.rank
                         << " cond=" << model.meta.condition_number
                         << " wall_time_s=" << model.meta.wall_time_s << '\n';
  }
  return model;
}

double cost(const KoopmanModel& model, const DemonstrationSet& demos) {
  require_valid(demos);
  check_spec_matches(model.spec, demos.layout);
  const int p = model.p();
  Eigen::VectorXd current(p);
  Eigen::VectorXd next(p);
  double total = 0.0;
  for (const auto& traj : demos.trajectories) {
    lift_into(model.spec, traj.states[0], current);
    for (int t = 0; t + 1 < traj.horizon(); ++t) {
      lift_into(model.spec, traj.states[t + 1], next);
      total += (next - model.K * current).squaredNorm();
      std::swap(current, next);
    }
  }
  return 0.5 * total;
}

ObservableVector predict_step(const KoopmanModel& model,
                              const ObservableVector& lifted) {
  if (lifted.values.size() != model.p()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predict_step: lifted vector length must equal p");
  }
  return {model.K * lifted.values, lifted.spec_id};
}

RolloutMode rollout_mode_from_string(const std::string& name) {
  if (name == "linear") return RolloutMode::kLinear;
  if (name == "relift") return RolloutMode::kRelift;
  throw Error(ErrorCode::kInvalidArgument, "unknown rollout mode: " + name);
}

std::string to_string(RolloutMode mode) {
  return mode == RolloutMode::kLinear ? "linear" : "relift";
}

Reference rollout(const KoopmanModel& model, const CompositeState& x1, int T,
                  RolloutMode mode) {
  if (T < 1) throw Error(ErrorCode::kInvalidArgument, "rollout: T must be >= 1");
  if (!x1.conforms_to(model.layout())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "rollout: initial state does not conform to the model layout");
  }
  const IndexRange rs = robot_slice(model.spec);
  const IndexRange os = object_slice(model.spec);

  Reference ref;
  ref.robot.reserve(T);
  ref.object.reserve(T);
  ref.robot.push_back(x1.robot);
  ref.object.push_back(x1.object);

  Eigen::VectorXd g(model.p());
  lift_into(model.spec, x1, g);
  Eigen::VectorXd next(model.p());
  for (int t = 2; t <= T; ++t) {
    next.noalias() = model.K * g;
    if (!next.allFinite()) {
      throw NonFiniteError(t, "rollout: non-finite prediction at t=" +
                                  std::to_string(t));
    }
    CompositeState x{next.segment(rs.begin, rs.size()),
                     next.segment(os.begin, os.size())};
    if (mode == RolloutMode::kRelift) {
      lift_into(model.spec, x, g);
    } else {
      g.swap(next);
    }
    ref.robot.push_back(std::move(x.robot));
    ref.object.push_back(std::move(x.object));
  }
  return ref;
}

}  // namespace koopmanix
