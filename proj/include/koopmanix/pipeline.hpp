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

#ifndef KOOPMANIX_PIPELINE_HPP
#define KOOPMANIX_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "koopmanix/controller.hpp"
#include "koopmanix/envs.hpp"
#include "koopmanix/koopman.hpp"
#include "koopmanix/lifting.hpp"

namespace koopmanix {

/// Everything a run depends on. All randomness derives from the seeds here.
struct RunConfig {
  EnvSpec env = make_env(EnvKind::kPointmassRelocation);
  ScriptedExpert expert = default_expert(EnvKind::kPointmassRelocation);
  LiftingKind lifting = LiftingKind::kKodexPolynomial;
  ObjectCubicPairs object_cubic_pairs = ObjectCubicPairs::kAllOrdered;
  int n_demos = 100;
  std::vector<int> demo_counts{10, 25, 50, 100, 150, 200};
  std::uint64_t seed = 0;          ///< demonstration episodes
  std::uint64_t eval_seed = 1000;  ///< held-out evaluation episodes
  std::uint64_t retune_seed = 2000;
  int eval_episodes = 100;
  TrainConfig controller;
  std::optional<double> pinv_tol;
  RolloutMode rollout_mode = RolloutMode::kLinear;
  Distribution distribution = Distribution::kIn;
  Variation variation = Variation::kHeavyHand;
  std::filesystem::path out_dir = "koopmanix-run";
  int threads = 1;  ///< fit accumulation; partial sums change rounding

  int horizon() const { return env.horizon; }
  LiftingSpec lifting_spec() const;
  void check() const;
};

nlohmann::json config_to_json(const RunConfig& config);

/// Fields absent from `j` keep their defaults. A config naming only an env
/// kind also picks that kind's default expert.
RunConfig config_from_json(const nlohmann::json& j);

/// FNV-1a over the canonical JSON of the config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Caps `requested` by KOOPMANIX_THREADS when set.
int thread_budget(int requested);

struct GenDemosResult {
  std::filesystem::path manifest;
  double expert_success_rate = 0.0;
};

struct FitResult {
  std::filesystem::path model_path;
  KoopmanModel model;
};

struct TrainResultFiles {
  std::filesystem::path controller_path;
  std::filesystem::path loss_path;
  TrainResult result;
  double train_time_s = 0.0;
};

struct EpisodeReport {
  std::uint64_t seed = 0;
  bool success = false;
  int rho_sum = 0;
  double imitation_error = 0.0;
};

struct SimulateReport {
  double success_rate = 0.0;
  double imitation_error = 0.0;  ///< mean over episodes
  std::vector<EpisodeReport> episodes;
};

struct EvalRow {
  std::string env;
  int n_demos = 0;
  std::uint64_t seed = 0;
  double train_time_s = 0.0;
  double imitation_error = 0.0;
  double success_rate = 0.0;
};

struct RetuneReport {
  std::string variation;
  double success_unperturbed = 0.0;
  double success_before = 0.0;  ///< original controller, perturbed env
  double success_after = 0.0;   ///< retuned controller, perturbed env
  double expert_success_rate = 0.0;
  std::filesystem::path controller_path;
};

/// Each step writes into config.out_dir plus a `<command>.stamp.json`, and
/// logs a short summary to `log` when given.
GenDemosResult run_gen_demos(const RunConfig& config, std::ostream* log = nullptr);
FitResult run_fit(const RunConfig& config, const std::filesystem::path& demos,
                  std::ostream* log = nullptr);
std::filesystem::path run_rollout(const RunConfig& config, const std::filesystem::path& model,
                                  std::ostream* log = nullptr);
TrainResultFiles run_train_controller(const RunConfig& config, const std::filesystem::path& demos,
                                      std::ostream* log = nullptr);
SimulateReport run_simulate(const RunConfig& config, const std::filesystem::path& model,
                            const std::filesystem::path& controller, std::ostream* log = nullptr);
std::vector<EvalRow> run_eval(const RunConfig& config, std::ostream* log = nullptr);
RetuneReport run_retune(const RunConfig& config, const std::filesystem::path& model,
                        const std::filesystem::path& controller, std::ostream* log = nullptr);

/// Closed-loop evaluation on `episodes` resets seeded from config.eval_seed,
/// with imitation error measured against the expert from the same reset.
SimulateReport evaluate_policy(const RunConfig& config, const EnvSpec& env,
                               const KoopmanModel& model, const ControllerModel& controller,
                               std::vector<Trajectory>* executed = nullptr);

}  // namespace koopmanix

#endif  // KOOPMANIX_PIPELINE_HPP
