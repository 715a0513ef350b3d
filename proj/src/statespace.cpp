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

#include "koopmanix/statespace.hpp"

#include <sstream>

#include "koopmanix/error.hpp"

namespace koopmanix {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kLayoutMismatch: return "layout_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kFitFailure: return "fit_failure";
    case ErrorCode::kMalformedFile: return "malformed_file";
    case ErrorCode::kSchemaMismatch: return "schema_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnsupported: return "unsupported";
  }
  return "unknown";
}

void StateLayout::check() const {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "layout: n must be >= 1");
  if (m < 0) throw Error(ErrorCode::kInvalidArgument, "layout: m must be >= 0");
  if (a < 1) throw Error(ErrorCode::kInvalidArgument, "layout: a must be >= 1");
  if (!robot_names.empty() && static_cast<int>(robot_names.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "layout: robot_names size does not match n");
  }
  if (!object_names.empty() && static_cast<int>(object_names.size()) != m) {
    throw Error(ErrorCode::kInvalidArgument,
                "layout: object_names size does not match m");
  }
}

Eigen::VectorXd CompositeState::stacked() const {
  Eigen::VectorXd x(robot.size() + object.size());
  x << robot, object;
  return x;
}

bool CompositeState::conforms_to(const StateLayout& layout) const {
  return robot.size() == layout.n && object.size() == layout.m;
}

bool CompositeState::all_finite() const {
  return robot.allFinite() && object.allFinite();
}

CompositeState CompositeState::split(
    const StateLayout& layout,
    const Eigen::Ref<const Eigen::VectorXd>& stacked) {
  if (stacked.size() != layout.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state vector length does not match layout n + m");
  }
  return {stacked.head(layout.n), stacked.segment(layout.n, layout.m)};
}

bool operator==(const CompositeState& lhs, const CompositeState& rhs) {
  return lhs.robot.size() == rhs.robot.size() &&
         lhs.object.size() == rhs.object.size() && lhs.robot == rhs.robot &&
         lhs.object == rhs.object;
}

bool operator==(const Trajectory& lhs, const Trajectory& rhs) {
  if (lhs.states != rhs.states) return false;
  if (lhs.torques.size() != rhs.torques.size()) return false;
  for (std::size_t i = 0; i < lhs.torques.size(); ++i) {
    if (lhs.torques[i].size() != rhs.torques[i].size() ||
        lhs.torques[i] != rhs.torques[i]) {
      return false;
    }
  }
  return true;
}

bool DemonstrationSet::has_torques() const {
  if (trajectories.empty()) return false;
  for (const auto& traj : trajectories) {
    if (!traj.has_torques()) return false;
  }
  return true;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  for (const auto& v : violations) {
    out << "; [traj " << v.trajectory << ", t " << v.time << "] " << v.message;
  }
  return out.str();
}

ValidationReport validate(const DemonstrationSet& demos) {
  ValidationReport report;
  auto add = [&report](ViolationKind kind, int traj, int t, std::string msg) {
    report.violations.push_back({kind, traj, t, std::move(msg)});
  };

  try {
    demos.layout.check();
  } catch (const Error& e) {
    add(ViolationKind::kBadLayout, -1, -1, e.what());
    return report;
  }
  if (demos.trajectories.empty()) {
    add(ViolationKind::kNoTrajectories, -1, -1, "demonstration set is empty");
  }

  const auto& layout = demos.layout;
  for (int i = 0; i < demos.size(); ++i) {
    const Trajectory& traj = demos.trajectories[i];
    if (traj.horizon() < 2) {
      add(ViolationKind::kShortHorizon, i, -1, "T < 2");
    }
    for (int t = 0; t < traj.horizon(); ++t) {
      const CompositeState& s = traj.states[t];
      if (!s.conforms_to(layout)) {
        add(ViolationKind::kDimensionMismatch, i, t,
            "state dimensions do not match layout");
      } else if (!s.all_finite()) {
        add(ViolationKind::kNonFinite, i, t, "non-finite state entry");
      }
    }
    if (traj.has_torques()) {
      if (static_cast<int>(traj.torques.size()) != traj.horizon() - 1) {
        add(ViolationKind::kTorqueCount, i, -1,
            "torque count must equal T - 1");
      }
      for (int t = 0; t < static_cast<int>(traj.torques.size()); ++t) {
        const Eigen::VectorXd& tau = traj.torques[t];
        if (tau.size() != layout.a) {
          add(ViolationKind::kDimensionMismatch, i, t,
              "torque length does not match layout a");
        } else if (!tau.allFinite()) {
          add(ViolationKind::kNonFinite, i, t, "non-finite torque entry");
        }
      }
    }
  }
  return report;
}

void require_valid(const DemonstrationSet& demos) {
  ValidationReport report = validate(demos);
  if (!report.ok()) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid demonstrations: " + report.summary());
  }
}

std::vector<StatePair> consecutive_pairs(const DemonstrationSet& demos) {
  require_valid(demos);
  std::vector<StatePair> pairs;
  pairs.reserve(pair_count(demos));
  for (int i = 0; i < demos.size(); ++i) {
    const auto& states = demos.trajectories[i].states;
    for (int t = 0; t + 1 < static_cast<int>(states.size()); ++t) {
      pairs.push_back({states[t], states[t + 1], i, t});
    }
  }
  return pairs;
}

int pair_count(const DemonstrationSet& demos) {
  int count = 0;
  for (const auto& traj : demos.trajectories) {
    count += std::max(0, traj.horizon() - 1);
  }
  return count;
}

}  // namespace koopmanix
