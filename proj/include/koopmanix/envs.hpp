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

#ifndef KOOPMANIX_ENVS_HPP
#define KOOPMANIX_ENVS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "koopmanix/controller.hpp"
#include "koopmanix/koopman.hpp"
#include "koopmanix/metrics.hpp"
#include "koopmanix/random.hpp"
#include "koopmanix/statespace.hpp"

namespace koopmanix {

enum class EnvKind { kLinear, kPendulum, kVanderpol, kPointmassRelocation };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

/// Half-open interval [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x < hi; }
  bool operator==(const Interval&) const = default;
};

enum class Distribution { kIn, kOut };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

/// Uniform sampler over a union of intervals. A parameter whose `out`
/// ranges equal its `in` ranges is not shifted out of distribution.
struct ParamSampler {
  std::string name;
  std::vector<Interval> in;
  std::vector<Interval> out;

  bool shifted() const { return in != out; }
  bool operator==(const ParamSampler&) const = default;
};

/// Draws from the union, choosing an interval with probability
/// proportional to its length.
double sample(const ParamSampler& sampler, Distribution d, Rng& rng);

/// Physical description of a synthetic task.
///
/// params, by kind:
///   linear:      rotation (rad per step)
///   pendulum:    mass, length, gravity, damping
///   vanderpol:   mu, beta
///   relocation:  hand_mass, object_mass, gravity, damping, attach_radius,
///                hand_start_z, hand_jitter
struct EnvSpec {
  EnvKind kind = EnvKind::kLinear;
  double dt = 0.1;
  int horizon = 100;
  std::map<std::string, double> params;
  StateLayout layout;
  std::vector<ParamSampler> samplers;

  double param(const std::string& name) const;

  /// Throws Error(kInvalidArgument) when dt <= 0, a parameter is missing or
  /// the layout does not match the kind.
  void check() const;

  bool operator==(const EnvSpec&) const = default;
};

/// Default parameters for each kind.
EnvSpec make_env(EnvKind kind);

/// Simulator state. `internal` holds variables that are not part of the
/// composite state: the target angle for pendulum, and for relocation
/// [target(3), ball(3), attached].
struct EnvState {
  CompositeState composite;
  Eigen::VectorXd internal;
  int t = 1;

  bool operator==(const EnvState&) const;
};

/// Feedback-law parameters, by kind:
///   linear:      gain (closed loop is M - gain * I)
///   pendulum:    kp, kd
///   vanderpol:   k
///   relocation:  k_reach, k_carry, switch_radius
struct ScriptedExpert {
  std::map<std::string, double> gains;

  double gain(const std::string& name) const;
};

ScriptedExpert default_expert(EnvKind kind);

/// Per-episode memory of the expert (relocation switches from reaching to
/// carrying once and never back).
struct ExpertMemory {
  int phase = 0;
};

Eigen::VectorXd expert_torque(const EnvSpec& spec, const ScriptedExpert& expert,
                              const EnvState& state, ExpertMemory& memory);

EnvState reset(const EnvSpec& spec, std::uint64_t seed,
               Distribution distribution = Distribution::kIn);

/// One dt of semi-implicit Euler. Throws Error(kNonFinite) for a non-finite
/// torque and Error(kDimensionMismatch) for a torque of the wrong length.
EnvState step(const EnvSpec& spec, const EnvState& state,
              const Eigen::Ref<const Eigen::VectorXd>& tau);

/// Success predicate of each kind, over composite-state indices:
///   linear      terminal-distance of x_r below 0.05
///   pendulum    terminal-distance of the angle error below 0.05
///   vanderpol   terminal-distance of the driver below 0.05
///   relocation  ball within 0.10 of the target on more than 10 steps
SuccessCriterion default_criterion(const EnvSpec& spec);

/// Seed of episode `index` within a batch seeded by `seed`.
std::uint64_t episode_seed(std::uint64_t seed, int index);

struct DemoBatch {
  DemonstrationSet demos;
  double expert_success_rate = 0.0;  ///< percent, under default_criterion
};

/// Episode k starts from reset(spec, episode_seed(seed, k), distribution).
DemoBatch generate_demos(const EnvSpec& spec, const ScriptedExpert& expert,
                         int N, int T, std::uint64_t seed,
                         Distribution distribution = Distribution::kIn);

/// Maps (x_r(t), x̂_r(t+1)) to a torque.
using TrackingController = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x_now, const Eigen::VectorXd& x_next)>;

struct Execution {
  Trajectory executed;  ///< T states, T - 1 applied torques
  Reference reference;
};

/// Rolls the model out from init.composite for T steps, then drives the env
/// with tau(t) = C(x_r(t), x̂_r(t+1)). Throws NonFiniteError naming the step
/// at which a torque or state stopped being finite.
Execution execute_policy(const KoopmanModel& model, const TrackingController& controller,
                         const EnvSpec& spec, const EnvState& init, int T,
                         RolloutMode mode = RolloutMode::kLinear);

Execution execute_policy(const KoopmanModel& model, const ControllerModel& controller,
                         const EnvSpec& spec, const EnvState& init, int T,
                         RolloutMode mode = RolloutMode::kLinear);

enum class Variation { kHeavyObject, kLightHand, kHeavyHand };

std::string to_string(Variation v);
Variation variation_from_string(const std::string& name);

/// Scales the relocation masses: object x 1.88/0.18, hand x 3/4 or x 5/4.
/// Ratios compound when applied repeatedly. Throws Error(kUnsupported) for
/// other kinds.
EnvSpec perturb_params(const EnvSpec& spec, Variation variation);

}  // namespace koopmanix

#endif  // KOOPMANIX_ENVS_HPP
