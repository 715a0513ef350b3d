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

#include "koopmanix/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "koopmanix/error.hpp"

namespace koopmanix {
namespace {

Eigen::VectorXd extract(const CompositeState& state, const std::vector<int>& indices) {
  const int n = static_cast<int>(state.robot.size());
  const int total = n + static_cast<int>(state.object.size());
  Eigen::VectorXd e(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int i = indices[k];
    if (i < 0 || i >= total) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "criterion index " + std::to_string(i) + " outside state of size " +
                      std::to_string(total));
    }
    e[k] = i < n ? state.robot[i] : state.object[i - n];
  }
  return e;
}

bool rho(const CompositeState& state, const SuccessCriterion& c) {
  const Eigen::VectorXd e = extract(state, c.indices);
  switch (c.kind) {
    case CriterionKind::kTerminalDistance:
    case CriterionKind::kCumulativeProximity:
      return e.norm() < c.threshold;
    case CriterionKind::kTerminalAngle:
      return e[0] > c.threshold;
    case CriterionKind::kCumulativeAlignment:
      return e.dot(c.axis) > c.threshold;
  }
  return false;
}

bool is_cumulative(CriterionKind kind) {
  return kind == CriterionKind::kCumulativeProximity ||
         kind == CriterionKind::kCumulativeAlignment;
}

}  // namespace

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::kTerminalDistance: return "terminal-distance";
    case CriterionKind::kTerminalAngle: return "terminal-angle";
    case CriterionKind::kCumulativeProximity: return "cumulative-proximity";
    case CriterionKind::kCumulativeAlignment: return "cumulative-alignment";
  }
  return "unknown";
}

CriterionKind criterion_kind_from_string(const std::string& name) {
  for (CriterionKind k : {CriterionKind::kTerminalDistance, CriterionKind::kTerminalAngle,
                          CriterionKind::kCumulativeProximity,
                          CriterionKind::kCumulativeAlignment}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown criterion kind '" + name + "'");
}

void SuccessCriterion::check() const {
  if (!std::isfinite(threshold)) {
    throw Error(ErrorCode::kInvalidArgument, "criterion threshold must be finite");
  }
  if (indices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "criterion extracts no dimensions");
  }
  if (is_cumulative(kind) && count_threshold < 1) {
    throw Error(ErrorCode::kInvalidArgument, "count_threshold must be >= 1");
  }
  if (kind == CriterionKind::kCumulativeAlignment &&
      axis.size() != static_cast<Eigen::Index>(indices.size())) {
    throw Error(ErrorCode::kInvalidArgument, "alignment axis length must match indices");
  }
}

bool SuccessCriterion::operator==(const SuccessCriterion& other) const {
  return kind == other.kind && threshold == other.threshold &&
         count_threshold == other.count_threshold && indices == other.indices &&
         axis.size() == other.axis.size() && axis == other.axis;
}

SuccessResult evaluate_success(const Trajectory& traj, const SuccessCriterion& criterion) {
  criterion.check();
  if (traj.states.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot evaluate an empty trajectory");
  }
  SuccessResult result;
  if (is_cumulative(criterion.kind)) {
    for (const CompositeState& s : traj.states) result.rho_sum += rho(s, criterion) ? 1 : 0;
    result.success = result.rho_sum > criterion.count_threshold;
  } else {
    result.success = rho(traj.states.back(), criterion);
    result.rho_sum = result.success ? 1 : 0;
  }
  return result;
}

double success_rate(const std::vector<Trajectory>& trajs, const SuccessCriterion& criterion) {
  if (trajs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "success rate over no trajectories");
  }
  int wins = 0;
  for (const Trajectory& t : trajs) wins += evaluate_success(t, criterion).success ? 1 : 0;
  return 100.0 * wins / static_cast<double>(trajs.size());
}

double imitation_error(const std::vector<Eigen::VectorXd>& reference,
                       const std::vector<Eigen::VectorXd>& demo) {
  if (reference.size() != demo.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "imitation error needs equal horizons, got " +
                    std::to_string(reference.size()) + " and " + std::to_string(demo.size()));
  }
  if (reference.empty()) {
    throw Error(ErrorCode::kEmptyInput, "imitation error over empty trajectories");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    if (reference[t].size() != demo[t].size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "robot dimension differs at step " + std::to_string(t + 1));
    }
    total += (reference[t] - demo[t]).lpNorm<1>();
  }
  return total / static_cast<double>(reference.size());
}

std::vector<Eigen::VectorXd> robot_path(const Trajectory& traj) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(traj.states.size());
  for (const CompositeState& s : traj.states) out.push_back(s.robot);
  return out;
}

double timing(const std::string& /*label*/, const std::function<void()>& thunk) {
  const auto start = std::chrono::steady_clock::now();
  thunk();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

TimingStats repeated_timing(const std::string& label, int repeats,
                            const std::function<void()>& thunk) {
  if (repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  }
  TimingStats stats;
  stats.label = label;
  for (int r = 0; r < repeats; ++r) stats.samples.push_back(timing(label, thunk));
  double sum = 0.0;
  for (double s : stats.samples) sum += s;
  stats.mean = sum / repeats;
  double sq = 0.0;
  for (double s : stats.samples) sq += (s - stats.mean) * (s - stats.mean);
  stats.variance = sq / repeats;
  std::vector<double> sorted = stats.samples;
  std::sort(sorted.begin(), sorted.end());
  stats.median = repeats % 2 == 1 ? sorted[repeats / 2]
                                  : 0.5 * (sorted[repeats / 2 - 1] + sorted[repeats / 2]);
  return stats;
}

}  // namespace koopmanix
