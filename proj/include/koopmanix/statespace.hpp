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

#ifndef KOOPMANIX_STATESPACE_HPP
#define KOOPMANIX_STATESPACE_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

namespace koopmanix {

/// Dimensions of the composite robot/object state and of the actuation.
struct StateLayout {
  int n = 1;  ///< robot-state dimension
  int m = 0;  ///< object-state dimension
  int a = 1;  ///< actuation (torque) dimension
  std::vector<std::string> robot_names;   ///< optional, size n when present
  std::vector<std::string> object_names;  ///< optional, size m when present

  int state_dim() const { return n + m; }

  /// Throws Error(kInvalidArgument) when an invariant is violated.
  void check() const;

  bool operator==(const StateLayout&) const = default;
};

/// x = [x_r; x_o].
struct CompositeState {
  Eigen::VectorXd robot;
  Eigen::VectorXd object;

  Eigen::VectorXd stacked() const;
  bool conforms_to(const StateLayout& layout) const;
  bool all_finite() const;

  static CompositeState split(const StateLayout& layout,
                              const Eigen::Ref<const Eigen::VectorXd>& stacked);

  friend bool operator==(const CompositeState& lhs, const CompositeState& rhs);
};

/// States x(1..T) and, optionally, the T-1 torques that actuate each
/// transition t -> t+1.
struct Trajectory {
  std::vector<CompositeState> states;
  std::vector<Eigen::VectorXd> torques;

  int horizon() const { return static_cast<int>(states.size()); }
  bool has_torques() const { return !torques.empty(); }

  friend bool operator==(const Trajectory& lhs, const Trajectory& rhs);
};

struct DemonstrationSet {
  StateLayout layout;
  std::vector<Trajectory> trajectories;

  int size() const { return static_cast<int>(trajectories.size()); }
  bool has_torques() const;

  friend bool operator==(const DemonstrationSet& lhs,
                         const DemonstrationSet& rhs) = default;
};

enum class ViolationKind {
  kBadLayout,
  kNoTrajectories,
  kShortHorizon,
  kDimensionMismatch,
  kTorqueCount,
  kNonFinite,
};

/// `trajectory` and `time` are 0-based container indices; -1 when the
/// violation is not tied to a specific trajectory or step.
struct Violation {
  ViolationKind kind;
  int trajectory = -1;
  int time = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const DemonstrationSet& demos);

/// Throws Error(kInvalidArgument) carrying the first violation.
void require_valid(const DemonstrationSet& demos);

struct StatePair {
  const CompositeState& current;
  const CompositeState& next;
  int trajectory;
  int time;  ///< 0-based index of `current` within its trajectory
};

/// All (x(t), x(t+1)) pairs in trajectory order, then time order. The pairs
/// reference states inside `demos`, which must outlive the result.
std::vector<StatePair> consecutive_pairs(const DemonstrationSet& demos);

/// Σ_n (T_n - 1).
int pair_count(const DemonstrationSet& demos);

}  // namespace koopmanix

#endif  // KOOPMANIX_STATESPACE_HPP
