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

// Command-line driver for the demonstration -> fit -> control -> evaluate
// pipeline. Every subcommand reads its inputs from disk and writes its
// outputs, plus a reproducibility stamp, under --out-dir.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "koopmanix/error.hpp"
#include "koopmanix/persist.hpp"
#include "koopmanix/pipeline.hpp"

namespace fs = std::filesystem;
using koopmanix::RunConfig;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_demos;
  std::optional<std::string> lifting;
  std::optional<double> pinv_tol;
  std::optional<std::string> rollout_mode;
  std::optional<std::string> distribution;
  std::optional<std::string> out_dir;
  std::optional<std::string> env;
  std::optional<std::string> variation;
  std::optional<int> episodes;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "seed for demonstration episodes");
  cmd->add_option("--n-demos", o.n_demos, "number of demonstrations");
  cmd->add_option("--lifting", o.lifting, "identity | kodex")
      ->check(CLI::IsMember({"identity", "kodex", "kodex-polynomial"}));
  cmd->add_option("--pinv-tol", o.pinv_tol, "relative pseudoinverse truncation");
  cmd->add_option("--rollout-mode", o.rollout_mode, "linear | relift")
      ->check(CLI::IsMember({"linear", "relift"}));
  cmd->add_option("--distribution", o.distribution, "in | out")->check(CLI::IsMember({"in", "out"}));
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--env", o.env, "linear | pendulum | vanderpol | pointmass-relocation");
  cmd->add_option("--variation", o.variation, "heavy-object | light-hand | heavy-hand");
  cmd->add_option("--episodes", o.episodes, "evaluation episodes");
}

RunConfig resolve(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config.empty()) j = koopmanix::read_json_file(o.config);
  if (o.env) j["env"] = *o.env;
  RunConfig c = koopmanix::config_from_json(j);
  if (o.seed) c.seed = *o.seed;
  if (o.n_demos) c.n_demos = *o.n_demos;
  if (o.lifting) c.lifting = koopmanix::lifting_kind_from_string(*o.lifting);
  if (o.pinv_tol) c.pinv_tol = *o.pinv_tol;
  if (o.rollout_mode) c.rollout_mode = koopmanix::rollout_mode_from_string(*o.rollout_mode);
  if (o.distribution) c.distribution = koopmanix::distribution_from_string(*o.distribution);
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.variation) c.variation = koopmanix::variation_from_string(*o.variation);
  if (o.episodes) c.eval_episodes = *o.episodes;
  c.check();
  return c;
}

void report_error(std::string_view code, const std::string& message, std::optional<int> step = {}) {
  nlohmann::json j{{"error", code}, {"message", message}};
  if (step) j["step"] = *step;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"koopmanix: Koopman-operator imitation learning"};
  app.require_subcommand(1);
  Overrides o;
  std::string demos;
  std::string model;
  std::string controller;

  auto* gen = app.add_subcommand("gen-demos", "record scripted-expert demonstrations");
  auto* fit = app.add_subcommand("fit", "fit the Koopman operator K = A G^+");
  auto* roll = app.add_subcommand("rollout", "integrate the learned reference dynamics");
  auto* train = app.add_subcommand("train-controller", "train the inverse-dynamics tracking controller");
  auto* sim = app.add_subcommand("simulate", "run the closed loop on held-out resets");
  auto* eval = app.add_subcommand("eval", "sweep demo counts and write metrics.csv");
  auto* retune = app.add_subcommand("retune", "retrain the controller on a perturbed system");
  for (CLI::App* cmd : {gen, fit, roll, train, sim, eval, retune}) add_common(cmd, o);
  for (CLI::App* cmd : {fit, train}) {
    cmd->add_option("--demos", demos, "demo manifest or directory (default <out-dir>/demos)");
  }
  for (CLI::App* cmd : {roll, sim, retune}) {
    cmd->add_option("--model", model, "model file (default <out-dir>/model.json)");
  }
  for (CLI::App* cmd : {sim, retune}) {
    cmd->add_option("--controller", controller, "controller file (default <out-dir>/controller.json)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage", e.what());
    return 2;
  }

  try {
    const RunConfig config = resolve(o);
    const fs::path demos_path = demos.empty() ? config.out_dir / "demos" : fs::path(demos);
    const fs::path model_path = model.empty() ? config.out_dir / "model.json" : fs::path(model);
    const fs::path controller_path =
        controller.empty() ? config.out_dir / "controller.json" : fs::path(controller);
    std::ostream* log = &std::cout;

    if (gen->parsed()) {
      koopmanix::run_gen_demos(config, log);
    } else if (fit->parsed()) {
      koopmanix::run_fit(config, demos_path, log);
    } else if (roll->parsed()) {
      koopmanix::run_rollout(config, model_path, log);
    } else if (train->parsed()) {
      koopmanix::run_train_controller(config, demos_path, log);
    } else if (sim->parsed()) {
      koopmanix::run_simulate(config, model_path, controller_path, log);
    } else if (eval->parsed()) {
      koopmanix::run_eval(config, log);
    } else if (retune->parsed()) {
      koopmanix::run_retune(config, model_path, controller_path, log);
    }
  } catch (const koopmanix::NonFiniteError& e) {
    report_error(koopmanix::error_code_name(e.code()), e.what(), e.step());
    return 1;
  } catch (const koopmanix::Error& e) {
    report_error(koopmanix::error_code_name(e.code()), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    report_error("malformed_file", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
