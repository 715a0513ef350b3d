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

#ifndef KOOPMANIX_KOOPMAN_HPP
#define KOOPMANIX_KOOPMAN_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "koopmanix/lifting.hpp"
#include "koopmanix/statespace.hpp"

namespace koopmanix {

/// Provenance of a fitted operator.
struct FitMeta {
  int n_demos = 0;
  int total_pairs = 0;
  double wall_time_s = 0.0;
  int rank = 0;                 ///< effective rank of G after truncation
  double condition_number = 0;  ///< sigma_max / smallest retained sigma
  double rel_tolerance = 0.0;

  bool operator==(const FitMeta&) const = default;
};

/// A p x p operator advancing the observables of `spec` one step.
struct KoopmanModel {
  Eigen::MatrixXd K;
  LiftingSpec spec;
  FitMeta meta;

  const StateLayout& layout() const { return spec.layout(); }
  int p() const { return static_cast<int>(K.rows()); }
};

/// Weighted second-moment sums:
///   A = Σ_n Σ_t g(x(t+1)) g(x(t))^T / (N (T_n - 1))
///   G = Σ_n Σ_t g(x(t))   g(x(t))^T / (N (T_n - 1))
struct FitAccumulators {
  Eigen::MatrixXd A;
  Eigen::MatrixXd G;
  int pair_count = 0;
};

/// Sums in trajectory order, then time order. With `threads` > 1 the
/// trajectories are split into contiguous chunks whose partial sums are
/// combined in chunk order; the result matches the sequential sum up to
/// rounding.
FitAccumulators accumulate(const DemonstrationSet& demos,
                           const LiftingSpec& spec, int threads = 1);

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  int rank = 0;
  Eigen::VectorXd singular_values;  ///< descending, untruncated
  double condition_number = 0.0;
};

/// Machine epsilon times p.
double default_pinv_tolerance(int p);

/// Moore-Penrose inverse via SVD. Singular values with
/// sigma <= rel_tolerance * sigma_max are treated as zero.
PseudoInverse pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                             double rel_tolerance);

struct FitOptions {
  std::optional<double> rel_tolerance;  ///< default_pinv_tolerance(p) if unset
  int threads = 1;
  std::ostream* diagnostics = nullptr;  ///< receives a one-line summary
};

/// K = A G^+.
KoopmanModel fit(const DemonstrationSet& demos, const LiftingSpec& spec,
                 const FitOptions& options = {});

/// Solve step of fit() for precomputed accumulators.
Eigen::MatrixXd operator_from_accumulators(const FitAccumulators& acc,
                                           double rel_tolerance,
                                           PseudoInverse* pinv_out = nullptr);

/// J = 1/2 Σ over every consecutive pair of ||g(x(t+1)) - K g(x(t))||^2,
/// unweighted across trajectories.
double cost(const KoopmanModel& model, const DemonstrationSet& demos);

ObservableVector predict_step(const KoopmanModel& model,
                              const ObservableVector& lifted);

enum class RolloutMode {
  kLinear,  ///< g_{t+1} = K g_t, never re-lifted
  kRelift,  ///< retrieve (x_r, x_o) after each step and lift again
};

RolloutMode rollout_mode_from_string(const std::string& name);
std::string to_string(RolloutMode mode);

/// Reference states x̂(1..T). robot[0] == x1.robot exactly.
struct Reference {
  std::vector<Eigen::VectorXd> robot;
  std::vector<Eigen::VectorXd> object;

  int horizon() const { return static_cast<int>(robot.size()); }
};

/// Throws NonFiniteError naming the first step whose prediction is not
/// finite.
Reference rollout(const KoopmanModel& model, const CompositeState& x1, int T,
                  RolloutMode mode = RolloutMode::kLinear);

}  // namespace koopmanix

#endif  // KOOPMANIX_KOOPMAN_HPP
