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

#ifndef KOOPMANIX_CONTROLLER_HPP
#define KOOPMANIX_CONTROLLER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "koopmanix/statespace.hpp"

namespace koopmanix {

/// Inverse-dynamics MLP: tau = C(x_r(t), x_r(t+1)).
///
/// Hidden layers use ReLU, the output layer is affine. Inputs are
/// standardized with `input_mean` / `input_std` before the first layer.
struct ControllerModel {
  std::vector<int> layer_sizes;          ///< [2n, h1, ..., a]
  std::vector<Eigen::MatrixXd> weights;  ///< weights[l] is sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_std;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int robot_dim() const { return layer_sizes.front() / 2; }
  int action_dim() const { return layer_sizes.back(); }
  int parameter_count() const;

  /// Throws Error(kInvalidArgument) on inconsistent shapes, non-positive
  /// std or non-finite parameters.
  void check() const;

  friend bool operator==(const ControllerModel& lhs, const ControllerModel& rhs);
};

enum class OptimizerKind { kAdam, kSgd };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct TrainConfig {
  double learning_rate = 1e-4;
  int iterations = 300;  ///< passes over the full training set
  int batch_size = 4;    ///< samples per optimizer step; 0 means full batch
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void check() const;
};

/// One supervised triple (x_r(t), x_r(t+1), tau(t)) with its loss weight.
struct ControlSample {
  Eigen::VectorXd x_now;
  Eigen::VectorXd x_next;
  Eigen::VectorXd tau;
  double weight = 1.0;
};

/// Every transition of every trajectory, weighted 1 / (N (T_n - 1)).
/// Throws when a trajectory carries no torques.
std::vector<ControlSample> control_samples(const DemonstrationSet& demos);

/// [2n, 4n, 4n, 2n, a].
std::vector<int> default_layer_sizes(const StateLayout& layout);

/// Glorot-uniform weights, zero biases, identity input normalization.
ControllerModel init_controller(const StateLayout& layout, std::uint64_t seed);
ControllerModel init_controller(std::vector<int> layer_sizes, std::uint64_t seed);

Eigen::VectorXd forward(const ControllerModel& model,
                        const Eigen::Ref<const Eigen::VectorXd>& x_now,
                        const Eigen::Ref<const Eigen::VectorXd>& x_next);

/// Σ_i w_i ||C(x_now_i, x_next_i) - tau_i||^2.
double loss(const ControllerModel& model, std::span<const ControlSample> samples);

struct TrainResult {
  ControllerModel model;
  std::vector<double> loss_history;  ///< entry k: loss after k iterations
};

TrainResult train(const DemonstrationSet& demos, const TrainConfig& config);
TrainResult train(std::span<const ControlSample> samples,
                  const StateLayout& layout, const TrainConfig& config);

/// Gradients of ||C(x_now, x_next) - tau||^2 with respect to every
/// parameter, in the shapes of model.weights / model.biases.
struct ParameterGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

ParameterGradients backprop(const ControllerModel& model,
                            const ControlSample& sample);

/// Largest relative gap between backprop() and central finite differences
/// over all parameters. |a - f| / max(|a|, |f|, 1e-7).
double gradient_check(const ControllerModel& model, const ControlSample& sample,
                      double epsilon);

}  // namespace koopmanix

#endif  // KOOPMANIX_CONTROLLER_HPP
