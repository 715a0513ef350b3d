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

#include "koopmanix/envs.hpp"

#include <cmath>
#include <initializer_list>
#include <utility>

#include "koopmanix/error.hpp"

namespace koopmanix {
namespace {

constexpr double kObjectMassRatio = 1.88 / 0.18;
constexpr double kLightHandRatio = 3.0 / 4.0;
constexpr double kHeavyHandRatio = 5.0 / 4.0;

// Relocation internal layout.
constexpr int kTarget = 0;
constexpr int kBall = 3;
constexpr int kAttached = 6;

std::vector<std::string> required_params(EnvKind kind) {
  switch (kind) {
    case EnvKind::kLinear: return {"rotation"};
    case EnvKind::kPendulum: return {"mass", "length", "gravity", "damping", "start_jitter"};
    case EnvKind::kVanderpol: return {"mu", "beta"};
    case EnvKind::kPointmassRelocation:
      return {"hand_mass", "object_mass", "gravity", "damping",
              "attach_radius", "hand_start_z", "hand_jitter"};
  }
  return {};
}

StateLayout layout_for(EnvKind kind) {
  StateLayout l;
  switch (kind) {
    case EnvKind::kLinear:
      l.n = 2, l.m = 0, l.a = 2;
      l.robot_names = {"x0", "x1"};
      break;
    case EnvKind::kPendulum:
      l.n = 2, l.m = 1, l.a = 1;
      l.robot_names = {"theta", "omega"};
      l.object_names = {"theta_error"};
      break;
    case EnvKind::kVanderpol:
      l.n = 1, l.m = 2, l.a = 1;
      l.robot_names = {"drive"};
      l.object_names = {"x", "y"};
      break;
    case EnvKind::kPointmassRelocation:
      l.n = 3, l.m = 6, l.a = 3;
      l.robot_names = {"hand_x", "hand_y", "hand_z"};
      l.object_names = {"ball_rel_target_x", "ball_rel_target_y", "ball_rel_target_z",
                        "ball_rel_hand_x", "ball_rel_hand_y", "ball_rel_hand_z"};
      break;
  }
  return l;
}

ParamSampler symmetric_sampler(std::string name, double inner, double outer) {
  return {std::move(name), {{-inner, inner}}, {{-outer, -inner}, {inner, outer}}};
}

Eigen::Vector3d vec3(const Eigen::VectorXd& v, int offset) {
  return v.segment<3>(offset);
}

CompositeState relocation_composite(const Eigen::Vector3d& hand, const Eigen::VectorXd& internal) {
  CompositeState s;
  s.robot = hand;
  s.object.resize(6);
  const Eigen::Vector3d ball = vec3(internal, kBall);
  s.object.head<3>() = ball - vec3(internal, kTarget);
  s.object.tail<3>() = ball - hand;
  return s;
}

void require_finite_state(const EnvState& s) {
  if (!s.composite.all_finite() || !s.internal.allFinite()) {
    throw NonFiniteError(s.t, "environment state became non-finite at step " +
                                  std::to_string(s.t));
  }
}

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kLinear: return "linear";
    case EnvKind::kPendulum: return "pendulum";
    case EnvKind::kVanderpol: return "vanderpol";
    case EnvKind::kPointmassRelocation: return "pointmass-relocation";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  for (EnvKind k : {EnvKind::kLinear, EnvKind::kPendulum, EnvKind::kVanderpol,
                    EnvKind::kPointmassRelocation}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown environment '" + name + "'");
}

std::string to_string(Distribution d) { return d == Distribution::kIn ? "in" : "out"; }

Distribution distribution_from_string(const std::string& name) {
  if (name == "in") return Distribution::kIn;
  if (name == "out") return Distribution::kOut;
  throw Error(ErrorCode::kInvalidArgument, "distribution must be 'in' or 'out', got '" + name + "'");
}

double sample(const ParamSampler& sampler, Distribution d, Rng& rng) {
  const std::vector<Interval>& ranges = d == Distribution::kIn ? sampler.in : sampler.out;
  double total = 0.0;
  for (const Interval& r : ranges) total += r.length();
  if (ranges.empty() || !(total > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sampler '" + sampler.name + "' has no support");
  }
  double pick = rng.uniform() * total;
  for (const Interval& r : ranges) {
    if (pick < r.length()) return rng.uniform(r.lo, r.hi);
    pick -= r.length();
  }
  return rng.uniform(ranges.back().lo, ranges.back().hi);
}

double EnvSpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                to_string(kind) + " environment is missing parameter '" + name + "'");
  }
  return it->second;
}

void EnvSpec::check() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  }
  if (horizon < 2) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 2");
  }
  for (const std::string& name : required_params(kind)) {
    if (!std::isfinite(param(name))) {
      throw Error(ErrorCode::kInvalidArgument, "parameter '" + name + "' is not finite");
    }
  }
  const StateLayout expected = layout_for(kind);
  if (layout.n != expected.n || layout.m != expected.m || layout.a != expected.a) {
    throw Error(ErrorCode::kLayoutMismatch, "layout does not match " + to_string(kind));
  }
  for (const ParamSampler& s : samplers) {
    for (const auto* ranges : {&s.in, &s.out}) {
      for (const Interval& r : *ranges) {
        if (!(r.hi > r.lo)) {
          throw Error(ErrorCode::kInvalidArgument, "sampler '" + s.name + "' has an empty interval");
        }
      }
    }
  }
}

EnvSpec make_env(EnvKind kind) {
  EnvSpec spec;
  spec.kind = kind;
  spec.layout = layout_for(kind);
  spec.horizon = 100;
  switch (kind) {
    case EnvKind::kLinear:
      spec.dt = 0.1;
      spec.params = {{"rotation", 0.1}};
      spec.samplers = {symmetric_sampler("x0_0", 1.0, 1.5), symmetric_sampler("x0_1", 1.0, 1.5)};
      break;
    case EnvKind::kPendulum:
      spec.dt = 0.05;
      spec.params = {{"mass", 1.0}, {"length", 1.0}, {"gravity", 9.81},
                     {"damping", 0.1}, {"start_jitter", 0.2}};
      spec.samplers = {symmetric_sampler("target", 1.0, 1.2)};
      break;
    case EnvKind::kVanderpol:
      spec.dt = 0.05;
      spec.params = {{"mu", 1.0}, {"beta", 0.5}};
      spec.samplers = {symmetric_sampler("drive0", 2.0, 2.5), symmetric_sampler("x0", 2.0, 2.5),
                       symmetric_sampler("y0", 2.0, 2.5)};
      break;
    case EnvKind::kPointmassRelocation: {
      spec.dt = 0.05;
      const double gravity = 9.81;
      spec.params = {{"hand_mass", 4.0},      {"object_mass", 0.18},
                     {"gravity", gravity},    {"damping", spec.dt * gravity / 0.15},
                     {"attach_radius", 0.1},  {"hand_start_z", 0.3},
                     {"hand_jitter", 0.05}};
      spec.samplers = {{"target_x", {{-0.25, 0.25}}, {{-0.25, 0.25}}},
                       {"target_y", {{-0.25, 0.25}}, {{-0.25, 0.25}}},
                       {"target_z", {{0.15, 0.35}}, {{0.35, 0.40}}}};
      break;
    }
  }
  return spec;
}

bool EnvState::operator==(const EnvState& other) const {
  return composite == other.composite && internal.size() == other.internal.size() &&
         internal == other.internal && t == other.t;
}

double ScriptedExpert::gain(const std::string& name) const {
  auto it = gains.find(name);
  if (it == gains.end()) {
    throw Error(ErrorCode::kInvalidArgument, "expert is missing gain '" + name + "'");
  }
  return it->second;
}

ScriptedExpert default_expert(EnvKind kind) {
  switch (kind) {
    case EnvKind::kLinear: return {{{"gain", 0.2}}};
    case EnvKind::kPendulum: return {{{"kp", 4.0}, {"kd", 4.0}}};
    case EnvKind::kVanderpol: return {{{"k", 1.0}}};
    case EnvKind::kPointmassRelocation:
      return {{{"k_reach", 10.0}, {"k_carry", 2.0}, {"switch_radius", 0.02}}};
  }
  return {};
}

SuccessCriterion default_criterion(const EnvSpec& spec) {
  SuccessCriterion c;
  switch (spec.kind) {
    case EnvKind::kLinear:
      c.kind = CriterionKind::kTerminalDistance;
      c.threshold = 0.05;
      c.indices = {0, 1};
      break;
    case EnvKind::kPendulum:
      c.kind = CriterionKind::kTerminalDistance;
      c.threshold = 0.05;
      c.indices = {2};
      break;
    case EnvKind::kVanderpol:
      c.kind = CriterionKind::kTerminalDistance;
      c.threshold = 0.05;
      c.indices = {0};
      break;
    case EnvKind::kPointmassRelocation:
      c.kind = CriterionKind::kCumulativeProximity;
      c.threshold = 0.10;
      c.count_threshold = 10;
      c.indices = {3, 4, 5};
      break;
  }
  return c;
}

Eigen::VectorXd expert_torque(const EnvSpec& spec, const ScriptedExpert& expert,
                              const EnvState& state, ExpertMemory& memory) {
  const CompositeState& x = state.composite;
  switch (spec.kind) {
    case EnvKind::kLinear:
      return -(expert.gain("gain") / spec.dt) * x.robot;
    case EnvKind::kPendulum: {
      const double mass = spec.param("mass");
      const double len = spec.param("length");
      const double theta = x.robot[0];
      const double omega = x.robot[1];
      const double target = state.internal[0];
      const double accel = expert.gain("kp") * (target - theta) - expert.gain("kd") * omega;
      Eigen::VectorXd tau(1);
      tau[0] = mass * spec.param("gravity") * len * std::sin(theta) +
               spec.param("damping") * omega + mass * len * len * accel;
      return tau;
    }
    case EnvKind::kVanderpol:
      return -expert.gain("k") * x.robot;
    case EnvKind::kPointmassRelocation: {
      const Eigen::Vector3d hand = x.robot;
      const bool attached = state.internal[kAttached] != 0.0;
      if (memory.phase == 0 && attached && hand.norm() < expert.gain("switch_radius")) {
        memory.phase = 1;
      }
      const Eigen::Vector3d ball_rel_target = vec3(state.internal, kBall) - vec3(state.internal, kTarget);
      const Eigen::Vector3d velocity = memory.phase == 1 ? Eigen::Vector3d(-expert.gain("k_carry") * ball_rel_target)
                                                         : Eigen::Vector3d(-expert.gain("k_reach") * hand);
      const double load = spec.param("hand_mass") + (attached ? spec.param("object_mass") : 0.0);
      Eigen::VectorXd tau = spec.param("damping") * velocity;
      tau[2] += load * spec.param("gravity");
      return tau;
    }
  }
  throw Error(ErrorCode::kUnsupported, "no expert for this environment");
}

EnvState reset(const EnvSpec& spec, std::uint64_t seed, Distribution distribution) {
  spec.check();
  Rng rng(seed);
  std::vector<double> draws;
  for (const ParamSampler& s : spec.samplers) draws.push_back(sample(s, distribution, rng));
  auto drawn = [&](std::size_t i) {
    if (i >= draws.size()) {
      throw Error(ErrorCode::kInvalidArgument, to_string(spec.kind) + " needs " +
                                                   std::to_string(i + 1) + " samplers");
    }
    return draws[i];
  };

  EnvState st;
  st.t = 1;
  switch (spec.kind) {
    case EnvKind::kLinear:
      st.composite.robot = Eigen::Vector2d(drawn(0), drawn(1));
      st.composite.object = Eigen::VectorXd(0);
      st.internal = Eigen::VectorXd(0);
      break;
    case EnvKind::kPendulum: {
      const double jitter = spec.param("start_jitter");
      const double theta = rng.uniform(-jitter, jitter);
      st.internal = Eigen::VectorXd::Constant(1, drawn(0));
      st.composite.robot = Eigen::Vector2d(theta, 0.0);
      st.composite.object = Eigen::VectorXd::Constant(1, theta - drawn(0));
      break;
    }
    case EnvKind::kVanderpol:
      st.composite.robot = Eigen::VectorXd::Constant(1, drawn(0));
      st.composite.object = Eigen::Vector2d(drawn(1), drawn(2));
      st.internal = Eigen::VectorXd(0);
      break;
    case EnvKind::kPointmassRelocation: {
      const double jitter = spec.param("hand_jitter");
      Eigen::Vector3d hand(0.0, 0.0, spec.param("hand_start_z"));
      for (int i = 0; i < 3; ++i) hand[i] += rng.uniform(-jitter, jitter);
      st.internal = Eigen::VectorXd::Zero(7);
      st.internal.segment<3>(kTarget) = Eigen::Vector3d(drawn(0), drawn(1), drawn(2));
      st.composite = relocation_composite(hand, st.internal);
      break;
    }
  }
  return st;
}

EnvState step(const EnvSpec& spec, const EnvState& state,
              const Eigen::Ref<const Eigen::VectorXd>& tau) {
  if (tau.size() != spec.layout.a) {
    throw Error(ErrorCode::kDimensionMismatch, "torque has length " + std::to_string(tau.size()) +
                                                   ", expected " + std::to_string(spec.layout.a));
  }
  if (!tau.allFinite()) {
    throw NonFiniteError(state.t, "non-finite torque at step " + std::to_string(state.t));
  }
  const double dt = spec.dt;
  EnvState next = state;
  next.t = state.t + 1;
  const CompositeState& x = state.composite;
  switch (spec.kind) {
    case EnvKind::kLinear: {
      const double c = std::cos(spec.param("rotation"));
      const double s = std::sin(spec.param("rotation"));
      Eigen::Matrix2d M;
      M << c, -s, s, c;
      next.composite.robot = M * x.robot + dt * tau;
      break;
    }
    case EnvKind::kPendulum: {
      const double mass = spec.param("mass");
      const double len = spec.param("length");
      const double theta = x.robot[0];
      const double omega = x.robot[1];
      const double accel = (tau[0] - spec.param("damping") * omega -
                            mass * spec.param("gravity") * len * std::sin(theta)) /
                           (mass * len * len);
      const double omega_next = omega + dt * accel;
      const double theta_next = theta + dt * omega_next;
      next.composite.robot = Eigen::Vector2d(theta_next, omega_next);
      next.composite.object[0] = theta_next - state.internal[0];
      break;
    }
    case EnvKind::kVanderpol: {
      const double r = x.robot[0];
      const double px = x.object[0];
      const double py = x.object[1];
      const double vy = py + dt * (spec.param("mu") * (1.0 - px * px) * py - px + spec.param("beta") * r);
      next.composite.robot[0] = r + dt * tau[0];
      next.composite.object = Eigen::Vector2d(px + dt * vy, vy);
      break;
    }
    case EnvKind::kPointmassRelocation: {
      bool attached = state.internal[kAttached] != 0.0;
      const double load = spec.param("hand_mass") + (attached ? spec.param("object_mass") : 0.0);
      Eigen::Vector3d force = tau;
      force[2] -= load * spec.param("gravity");
      const Eigen::Vector3d hand = x.robot + (dt / spec.param("damping")) * force;
      if (!attached && (vec3(state.internal, kBall) - hand).norm() < spec.param("attach_radius")) {
        attached = true;
        next.internal[kAttached] = 1.0;
      }
      if (attached) next.internal.segment<3>(kBall) = hand;
      next.composite = relocation_composite(hand, next.internal);
      break;
    }
  }
  require_finite_state(next);
  return next;
}

std::uint64_t episode_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer over the (seed, index) pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DemoBatch generate_demos(const EnvSpec& spec, const ScriptedExpert& expert, int N, int T,
                         std::uint64_t seed, Distribution distribution) {
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one demonstration");
  if (T < 2) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 2");
  spec.check();
  DemoBatch batch;
  batch.demos.layout = spec.layout;
  batch.demos.trajectories.reserve(N);
  const SuccessCriterion criterion = default_criterion(spec);
  int wins = 0;
  for (int k = 0; k < N; ++k) {
    EnvState st = reset(spec, episode_seed(seed, k), distribution);
    ExpertMemory memory;
    Trajectory traj;
    traj.states.reserve(T);
    traj.torques.reserve(T - 1);
    traj.states.push_back(st.composite);
    for (int t = 1; t < T; ++t) {
      Eigen::VectorXd tau = expert_torque(spec, expert, st, memory);
      st = step(spec, st, tau);
      traj.torques.push_back(std::move(tau));
      traj.states.push_back(st.composite);
    }
    wins += evaluate_success(traj, criterion).success ? 1 : 0;
    batch.demos.trajectories.push_back(std::move(traj));
  }
  batch.expert_success_rate = 100.0 * wins / N;
  return batch;
}

Execution execute_policy(const KoopmanModel& model, const TrackingController& controller,
                         const EnvSpec& spec, const EnvState& init, int T, RolloutMode mode) {
  const StateLayout& ml = model.layout();
  if (ml.n != spec.layout.n || ml.m != spec.layout.m) {
    throw Error(ErrorCode::kLayoutMismatch, "model layout does not match the environment");
  }
  Execution out;
  out.reference = rollout(model, init.composite, T, mode);
  EnvState st = init;
  out.executed.states.reserve(T);
  out.executed.torques.reserve(T - 1);
  out.executed.states.push_back(st.composite);
  for (int t = 0; t + 1 < T; ++t) {
    Eigen::VectorXd tau = controller(st.composite.robot, out.reference.robot[t + 1]);
    if (!tau.allFinite()) {
      throw NonFiniteError(t + 1, "controller produced a non-finite torque at step " +
                                      std::to_string(t + 1));
    }
    st = step(spec, st, tau);
    out.executed.torques.push_back(std::move(tau));
    out.executed.states.push_back(st.composite);
  }
  return out;
}

Execution execute_policy(const KoopmanModel& model, const ControllerModel& controller,
                         const EnvSpec& spec, const EnvState& init, int T, RolloutMode mode) {
  if (controller.robot_dim() != spec.layout.n || controller.action_dim() != spec.layout.a) {
    throw Error(ErrorCode::kLayoutMismatch, "controller shape does not match the environment");
  }
  auto policy = [&controller](const Eigen::VectorXd& now, const Eigen::VectorXd& next) {
    return forward(controller, now, next);
  };
  return execute_policy(model, TrackingController(policy), spec, init, T, mode);
}

std::string to_string(Variation v) {
  switch (v) {
    case Variation::kHeavyObject: return "heavy-object";
    case Variation::kLightHand: return "light-hand";
    case Variation::kHeavyHand: return "heavy-hand";
  }
  return "unknown";
}

Variation variation_from_string(const std::string& name) {
  for (Variation v : {Variation::kHeavyObject, Variation::kLightHand, Variation::kHeavyHand}) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown variation '" + name + "'");
}

EnvSpec perturb_params(const EnvSpec& spec, Variation variation) {
  if (spec.kind != EnvKind::kPointmassRelocation) {
    throw Error(ErrorCode::kUnsupported,
                "mass variations apply to pointmass-relocation only, not " + to_string(spec.kind));
  }
  EnvSpec out = spec;
  switch (variation) {
    case Variation::kHeavyObject: out.params.at("object_mass") *= kObjectMassRatio; break;
    case Variation::kLightHand: out.params.at("hand_mass") *= kLightHandRatio; break;
    case Variation::kHeavyHand: out.params.at("hand_mass") *= kHeavyHandRatio; break;
  }
  return out;
}

}  // namespace koopmanix
