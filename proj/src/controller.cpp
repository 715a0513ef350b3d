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

#include "koopmanix/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "koopmanix/error.hpp"
#include "koopmanix/random.hpp"

namespace koopmanix {
namespace {

constexpr double kMinStd = 1e-8;

// Pre-activations and activations of one forward pass.
struct Activations {
  std::vector<Eigen::VectorXd> z;  // z[l] = W_l h[l] + b_l
  std::vector<Eigen::VectorXd> h;  // h[0] = normalized input, h[l+1] = relu(z[l])
};

void normalize_input(const ControllerModel& model,
                     const Eigen::Ref<const Eigen::VectorXd>& x_now,
                     const Eigen::Ref<const Eigen::VectorXd>& x_next,
                     Eigen::VectorXd& out) {
  const int n = model.robot_dim();
  if (x_now.size() != n || x_next.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "controller expects robot states of length " + std::to_string(n) +
                    ", got " + std::to_string(x_now.size()) + " and " +
                    std::to_string(x_next.size()));
  }
  out.resize(2 * n);
  out.head(n) = x_now;
  out.tail(n) = x_next;
  out = (out - model.input_mean).cwiseQuotient(model.input_std);
}

void run_forward(const ControllerModel& model,
                 const Eigen::Ref<const Eigen::VectorXd>& x_now,
                 const Eigen::Ref<const Eigen::VectorXd>& x_next,
                 Activations& act) {
  const int L = model.layer_count();
  act.z.resize(L);
  act.h.resize(L + 1);
  normalize_input(model, x_now, x_next, act.h[0]);
  for (int l = 0; l < L; ++l) {
    act.z[l].noalias() = model.weights[l] * act.h[l];
    act.z[l] += model.biases[l];
    if (l + 1 < L) {
      act.h[l + 1] = act.z[l].cwiseMax(0.0);
    } else {
      act.h[l + 1] = act.z[l];
    }
  }
}

// Adds scale * d||out - tau||^2/dtheta into grad.
void run_backward(const ControllerModel& model, const Activations& act,
                  const Eigen::VectorXd& tau, double scale,
                  ParameterGradients& grad) {
  const int L = model.layer_count();
  Eigen::VectorXd delta = 2.0 * scale * (act.h[L] - tau);
  for (int l = L - 1; l >= 0; --l) {
    grad.weights[l].noalias() += delta * act.h[l].transpose();
    grad.biases[l] += delta;
    if (l == 0) break;
    Eigen::VectorXd back = model.weights[l].transpose() * delta;
    for (Eigen::Index i = 0; i < back.size(); ++i) {
      if (act.z[l - 1][i] <= 0.0) back[i] = 0.0;
    }
    delta.swap(back);
  }
}

ParameterGradients zero_gradients(const ControllerModel& model) {
  ParameterGradients g;
  for (int l = 0; l < model.layer_count(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                              model.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return g;
}

void set_zero(ParameterGradients& g) {
  for (auto& w : g.weights) w.setZero();
  for (auto& b : g.biases) b.setZero();
}

// Visits every parameter in a fixed order: layer by layer, weights
// (column-major storage order) then biases.
template <typename Fn>
void for_each_parameter(ControllerModel& model, Fn&& fn) {
  for (int l = 0; l < model.layer_count(); ++l) {
    double* w = model.weights[l].data();
    for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) fn(l, false, i, w[i]);
    double* b = model.biases[l].data();
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) fn(l, true, i, b[i]);
  }
}

class Optimizer {
 public:
  Optimizer(const ControllerModel& model, const TrainConfig& config)
      : config_(config), m_(zero_gradients(model)), v_(zero_gradients(model)) {}

  void step(ControllerModel& model, const ParameterGradients& g) {
    if (config_.optimizer == OptimizerKind::kSgd) {
      for (int l = 0; l < model.layer_count(); ++l) {
        model.weights[l] -= config_.learning_rate * g.weights[l];
        model.biases[l] -= config_.learning_rate * g.biases[l];
      }
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, t_);
    const double c2 = 1.0 - std::pow(config_.beta2, t_);
    const double step = config_.learning_rate / c1;
    const double root_c2 = std::sqrt(c2);
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = config_.beta1 * m + (1.0 - config_.beta1) * grad;
      v = config_.beta2 * v + (1.0 - config_.beta2) * grad.cwiseAbs2();
      param.array() -= step * m.array() /
                       (v.array().sqrt() / root_c2 + config_.epsilon);
    };
    for (int l = 0; l < model.layer_count(); ++l) {
      update(model.weights[l], g.weights[l], m_.weights[l], v_.weights[l]);
      update(model.biases[l], g.biases[l], m_.biases[l], v_.biases[l]);
    }
  }

 private:
  TrainConfig config_;
  ParameterGradients m_;
  ParameterGradients v_;
  long t_ = 0;
};

}  // namespace

int ControllerModel::parameter_count() const {
  int count = 0;
  for (int l = 0; l < layer_count(); ++l) {
    count += static_cast<int>(weights[l].size() + biases[l].size());
  }
  return count;
}

void ControllerModel::check() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "invalid controller: " + what);
  };
  if (layer_sizes.size() < 2) fail("needs at least input and output layer");
  for (int s : layer_sizes) {
    if (s < 1) fail("layer sizes must be positive");
  }
  if (layer_sizes.front() % 2 != 0) fail("input size must be 2n");
  const std::size_t L = layer_sizes.size() - 1;
  if (weights.size() != L || biases.size() != L) fail("layer count mismatch");
  for (std::size_t l = 0; l < L; ++l) {
    if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
        biases[l].size() != layer_sizes[l + 1]) {
      fail("layer " + std::to_string(l) + " has incompatible shape");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      fail("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
  if (input_mean.size() != layer_sizes.front() ||
      input_std.size() != layer_sizes.front()) {
    fail("input normalization has wrong length");
  }
  if (!input_mean.allFinite() || !input_std.allFinite()) {
    fail("input normalization is not finite");
  }
  if ((input_std.array() <= 0.0).any()) fail("input std must be positive");
}

bool operator==(const ControllerModel& lhs, const ControllerModel& rhs) {
  if (lhs.layer_sizes != rhs.layer_sizes || lhs.weights.size() != rhs.weights.size() ||
      lhs.biases.size() != rhs.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < lhs.weights.size(); ++l) {
    if (lhs.weights[l].rows() != rhs.weights[l].rows() ||
        lhs.weights[l].cols() != rhs.weights[l].cols() ||
        lhs.weights[l] != rhs.weights[l]) {
      return false;
    }
    if (lhs.biases[l].size() != rhs.biases[l].size() || lhs.biases[l] != rhs.biases[l]) {
      return false;
    }
  }
  return lhs.input_mean.size() == rhs.input_mean.size() &&
         lhs.input_mean == rhs.input_mean &&
         lhs.input_std.size() == rhs.input_std.size() && lhs.input_std == rhs.input_std;
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

void TrainConfig::check() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  }
  if (iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be at least 1");
  }
  if (batch_size < 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 0");
  }
}

std::vector<ControlSample> control_samples(const DemonstrationSet& demos) {
  require_valid(demos);
  const double N = demos.size();
  std::vector<ControlSample> samples;
  samples.reserve(pair_count(demos));
  for (int k = 0; k < demos.size(); ++k) {
    const Trajectory& traj = demos.trajectories[k];
    if (!traj.has_torques()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trajectory " + std::to_string(k) + " carries no torques");
    }
    const double w = 1.0 / (N * (traj.horizon() - 1));
    for (int t = 0; t + 1 < traj.horizon(); ++t) {
      samples.push_back({traj.states[t].robot, traj.states[t + 1].robot,
                         traj.torques[t], w});
    }
  }
  return samples;
}

std::vector<int> default_layer_sizes(const StateLayout& layout) {
  layout.check();
  const int n = layout.n;
  return {2 * n, 4 * n, 4 * n, 2 * n, layout.a};
}

ControllerModel init_controller(const StateLayout& layout, std::uint64_t seed) {
  return init_controller(default_layer_sizes(layout), seed);
}

ControllerModel init_controller(std::vector<int> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2 || layer_sizes.front() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "layer sizes must start with an even input width and have >= 2 entries");
  }
  ControllerModel model;
  model.layer_sizes = std::move(layer_sizes);
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    if (fan_in < 1 || fan_out < 1) {
      throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
    }
    const double r = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-r, r);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  model.input_mean = Eigen::VectorXd::Zero(model.layer_sizes.front());
  model.input_std = Eigen::VectorXd::Ones(model.layer_sizes.front());
  return model;
}

Eigen::VectorXd forward(const ControllerModel& model,
                        const Eigen::Ref<const Eigen::VectorXd>& x_now,
                        const Eigen::Ref<const Eigen::VectorXd>& x_next) {
  Activations act;
  run_forward(model, x_now, x_next, act);
  return act.h.back();
}

double loss(const ControllerModel& model, std::span<const ControlSample> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "loss over an empty sample set");
  }
  Activations act;
  double total = 0.0;
  for (const ControlSample& s : samples) {
    if (s.tau.size() != model.action_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "torque length does not match controller output");
    }
    run_forward(model, s.x_now, s.x_next, act);
    total += s.weight * (act.h.back() - s.tau).squaredNorm();
  }
  return total;
}

TrainResult train(const DemonstrationSet& demos, const TrainConfig& config) {
  const std::vector<ControlSample> samples = control_samples(demos);
  return train(samples, demos.layout, config);
}

TrainResult train(std::span<const ControlSample> samples, const StateLayout& layout,
                  const TrainConfig& config) {
  config.check();
  layout.check();
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no training samples");
  }
  const int n = layout.n;
  const int in = 2 * n;
  for (const ControlSample& s : samples) {
    if (s.x_now.size() != n || s.x_next.size() != n || s.tau.size() != layout.a) {
      throw Error(ErrorCode::kDimensionMismatch, "training sample does not match layout");
    }
  }

  TrainResult result;
  ControllerModel& model = result.model;

  // Input standardization over the unweighted training inputs.
  const double count = static_cast<double>(samples.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(in);
  for (const ControlSample& s : samples) {
    mean.head(n) += s.x_now;
    mean.tail(n) += s.x_next;
  }
  mean /= count;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(in);
  for (const ControlSample& s : samples) {
    var.head(n) += (s.x_now - mean.head(n)).cwiseAbs2();
    var.tail(n) += (s.x_next - mean.tail(n)).cwiseAbs2();
  }
  const Eigen::VectorXd std_dev = (var / count).cwiseSqrt().cwiseMax(kMinStd);

  model = init_controller(layout, config.seed);
  model.input_mean = mean;
  model.input_std = std_dev;

  // Output bias starts at the weighted mean torque.
  double weight_sum = 0.0;
  Eigen::VectorXd tau_mean = Eigen::VectorXd::Zero(layout.a);
  for (const ControlSample& s : samples) {
    tau_mean += s.weight * s.tau;
    weight_sum += s.weight;
  }
  if (!(weight_sum > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample weights must sum to a positive value");
  }
  model.biases.back() = tau_mean / weight_sum;

  const int total = static_cast<int>(samples.size());
  const int batch = config.batch_size == 0 ? total : std::min(config.batch_size, total);
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed ^ 0x5DEECE66DULL);

  Optimizer optimizer(model, config);
  ParameterGradients grad = zero_gradients(model);
  Activations act;

  result.loss_history.reserve(config.iterations + 1);
  result.loss_history.push_back(loss(model, samples));
  for (int it = 1; it <= config.iterations; ++it) {
    if (batch < total) rng.shuffle(order);
    for (int start = 0; start < total; start += batch) {
      const int stop = std::min(start + batch, total);
      double batch_weight = 0.0;
      for (int k = start; k < stop; ++k) batch_weight += samples[order[k]].weight;
      set_zero(grad);
      for (int k = start; k < stop; ++k) {
        const ControlSample& s = samples[order[k]];
        run_forward(model, s.x_now, s.x_next, act);
        run_backward(model, act, s.tau, s.weight / batch_weight, grad);
      }
      optimizer.step(model, grad);
    }
    const double value = loss(model, samples);
    if (!std::isfinite(value)) {
      throw NonFiniteError(it, "controller training loss became non-finite at iteration " +
                                   std::to_string(it));
    }
    result.loss_history.push_back(value);
  }
  return result;
}

ParameterGradients backprop(const ControllerModel& model, const ControlSample& sample) {
  if (sample.tau.size() != model.action_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "torque length does not match controller output");
  }
  Activations act;
  run_forward(model, sample.x_now, sample.x_next, act);
  ParameterGradients grad = zero_gradients(model);
  run_backward(model, act, sample.tau, 1.0, grad);
  return grad;
}

double gradient_check(const ControllerModel& model, const ControlSample& sample,
                      double epsilon) {
  const ParameterGradients analytic = backprop(model, sample);
  ControllerModel probe = model;
  auto value = [&]() {
    return (forward(probe, sample.x_now, sample.x_next) - sample.tau).squaredNorm();
  };
  double worst = 0.0;
  for_each_parameter(probe, [&](int l, bool is_bias, Eigen::Index i, double& param) {
    const double saved = param;
    param = saved + epsilon;
    const double up = value();
    param = saved - epsilon;
    const double down = value();
    param = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double exact =
        is_bias ? analytic.biases[l].data()[i] : analytic.weights[l].data()[i];
    const double scale = std::max({std::abs(exact), std::abs(numeric), 1e-7});
    worst = std::max(worst, std::abs(exact - numeric) / scale);
  });
  return worst;
}

}  // namespace koopmanix
