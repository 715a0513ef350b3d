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

#ifndef KOOPMANIX_METRICS_HPP
#define KOOPMANIX_METRICS_HPP

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "koopmanix/statespace.hpp"

namespace koopmanix {

enum class CriterionKind {
  kTerminalDistance,     ///< ||e(x(T))|| < threshold
  kTerminalAngle,        ///< e(x(T))[0] > threshold
  kCumulativeProximity,  ///< rho(t) = ||e(x(t))|| < threshold
  kCumulativeAlignment,  ///< rho(t) = <e(x(t)), axis> > threshold
};

std::string to_string(CriterionKind kind);
CriterionKind criterion_kind_from_string(const std::string& name);

/// Task predicate over the extracted vector e(x) = x[indices], where x is
/// the stacked composite state [x_r; x_o]. Cumulative kinds succeed when
/// Σ_t rho(t) > count_threshold.
struct SuccessCriterion {
  CriterionKind kind = CriterionKind::kTerminalDistance;
  double threshold = 0.0;
  int count_threshold = 1;
  std::vector<int> indices;
  Eigen::VectorXd axis;  ///< alignment kind only; same length as indices

  void check() const;
  bool operator==(const SuccessCriterion&) const;
};

struct SuccessResult {
  bool success = false;
  int rho_sum = 0;  ///< steps with rho(t) = 1; terminal kinds report 0 or 1
};

/// Throws Error(kDimensionMismatch) when an index falls outside the state.
SuccessResult evaluate_success(const Trajectory& traj, const SuccessCriterion& criterion);

/// Percentage in [0, 100]. Throws Error(kEmptyInput) on an empty list.
double success_rate(const std::vector<Trajectory>& trajs, const SuccessCriterion& criterion);

/// Mean over t of ||reference(t) - demo(t)||_1.
double imitation_error(const std::vector<Eigen::VectorXd>& reference,
                       const std::vector<Eigen::VectorXd>& demo);

/// Robot states of a trajectory.
std::vector<Eigen::VectorXd> robot_path(const Trajectory& traj);

/// Wall seconds of one call on the steady clock.
double timing(const std::string& label, const std::function<void()>& thunk);

struct TimingStats {
  std::string label;
  std::vector<double> samples;
  double mean = 0.0;
  double variance = 0.0;  ///< population variance
  double median = 0.0;
};

TimingStats repeated_timing(const std::string& label, int repeats,
                            const std::function<void()>& thunk);

}  // namespace koopmanix

#endif  // KOOPMANIX_METRICS_HPP
