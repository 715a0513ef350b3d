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

#include "koopmanix/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <thread>

#include "koopmanix/error.hpp"
#include "koopmanix/metrics.hpp"
#include "koopmanix/persist.hpp"

namespace koopmanix {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json seeds_json(const RunConfig& c) {
  return json{{"seed", c.seed},
              {"eval_seed", c.eval_seed},
              {"retune_seed", c.retune_seed},
              {"controller_seed", c.controller.seed}};
}

void write_stamp(const RunConfig& config, const std::string& command, json inputs = json::object()) {
  json stamp{{"command", command},
             {"config_hash", config_hash(config)},
             {"config", config_to_json(config)},
             {"seeds", seeds_json(config)},
             {"inputs", std::move(inputs)},
             {"versions",
              {{"koopmanix", kVersion},
               {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION)},
               {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_text_file(config.out_dir / (command + ".stamp.json"), dump_json(stamp));
}

json train_config_to_json(const TrainConfig& t) {
  return json{{"learning_rate", t.learning_rate}, {"iterations", t.iterations},
              {"batch_size", t.batch_size},       {"seed", t.seed},
              {"optimizer", to_string(t.optimizer)}, {"beta1", t.beta1},
              {"beta2", t.beta2},                 {"epsilon", t.epsilon}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig t) {
  if (j.contains("learning_rate")) t.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("iterations")) t.iterations = j.at("iterations").get<int>();
  if (j.contains("batch_size")) t.batch_size = j.at("batch_size").get<int>();
  if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("optimizer")) t.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  if (j.contains("beta1")) t.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) t.beta2 = j.at("beta2").get<double>();
  if (j.contains("epsilon")) t.epsilon = j.at("epsilon").get<double>();
  return t;
}

Trajectory expert_trajectory(const EnvSpec& env, const ScriptedExpert& expert, EnvState st, int T) {
  ExpertMemory memory;
  Trajectory traj;
  traj.states.push_back(st.composite);
  for (int t = 1; t < T; ++t) {
    Eigen::VectorXd tau = expert_torque(env, expert, st, memory);
    st = step(env, st, tau);
    traj.torques.push_back(std::move(tau));
    traj.states.push_back(st.composite);
  }
  return traj;
}

DemonstrationSet prefix(const DemonstrationSet& demos, int count) {
  DemonstrationSet out;
  out.layout = demos.layout;
  out.trajectories.assign(demos.trajectories.begin(), demos.trajectories.begin() + count);
  return out;
}

void log_line(std::ostream* log, const std::string& line) {
  if (log != nullptr) *log << line << '\n';
}

std::string fmt(double v) { return format_double(v); }

json simulate_report_json(const RunConfig& config, const EnvSpec& env, const SimulateReport& r) {
  json episodes = json::array();
  for (const EpisodeReport& e : r.episodes) {
    episodes.push_back({{"seed", e.seed},
                        {"success", e.success},
                        {"rho_sum", e.rho_sum},
                        {"imitation_error", e.imitation_error}});
  }
  return json{{"env", to_string(env.kind)},
              {"distribution", to_string(config.distribution)},
              {"rollout_mode", to_string(config.rollout_mode)},
              {"eval_seed", config.eval_seed},
              {"episodes", static_cast<int>(r.episodes.size())},
              {"success_rate", r.success_rate},
              {"imitation_error", r.imitation_error},
              {"per_episode", episodes}};
}

}  // namespace

LiftingSpec RunConfig::lifting_spec() const {
  switch (lifting) {
    case LiftingKind::kIdentity: return LiftingSpec::identity(env.layout);
    case LiftingKind::kKodexPolynomial: return LiftingSpec::kodex(env.layout, object_cubic_pairs);
    case LiftingKind::kMonomialList: break;
  }
  throw Error(ErrorCode::kUnsupported, "the pipeline supports identity and kodex lifting only");
}

void RunConfig::check() const {
  env.check();
  controller.check();
  if (n_demos < 1) throw Error(ErrorCode::kInvalidArgument, "n_demos must be >= 1");
  if (eval_episodes < 1) throw Error(ErrorCode::kInvalidArgument, "eval_episodes must be >= 1");
  if (demo_counts.empty()) throw Error(ErrorCode::kInvalidArgument, "demo_counts is empty");
  for (int c : demo_counts) {
    if (c < 1) throw Error(ErrorCode::kInvalidArgument, "demo counts must be >= 1");
  }
  if (pinv_tol && !(*pinv_tol >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pinv_tol must be non-negative");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 1");
  lifting_spec();
}

json config_to_json(const RunConfig& c) {
  json gains = json::object();
  for (const auto& [name, value] : c.expert.gains) gains[name] = value;
  return json{{"env", env_to_json(c.env)},
              {"expert", gains},
              {"lifting", to_string(c.lifting)},
              {"object_cubic_pairs",
               c.object_cubic_pairs == ObjectCubicPairs::kAllOrdered ? "all-ordered" : "distinct"},
              {"n_demos", c.n_demos},
              {"demo_counts", c.demo_counts},
              {"seed", c.seed},
              {"eval_seed", c.eval_seed},
              {"retune_seed", c.retune_seed},
              {"eval_episodes", c.eval_episodes},
              {"controller", train_config_to_json(c.controller)},
              {"pinv_tol", c.pinv_tol ? json(*c.pinv_tol) : json(nullptr)},
              {"rollout_mode", to_string(c.rollout_mode)},
              {"distribution", to_string(c.distribution)},
              {"variation", to_string(c.variation)},
              {"out_dir", c.out_dir.generic_string()},
              {"threads", c.threads}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, "config must be a JSON object");
  if (j.contains("env")) {
    const json& e = j.at("env");
    c.env = e.is_string() ? make_env(env_kind_from_string(e.get<std::string>())) : env_from_json(e);
    c.expert = default_expert(c.env.kind);
  }
  if (j.contains("expert")) {
    for (const auto& [name, value] : j.at("expert").items()) c.expert.gains[name] = value.get<double>();
  }
  if (j.contains("lifting")) c.lifting = lifting_kind_from_string(j.at("lifting").get<std::string>());
  if (j.contains("object_cubic_pairs")) {
    const std::string p = j.at("object_cubic_pairs").get<std::string>();
    if (p == "all-ordered") {
      c.object_cubic_pairs = ObjectCubicPairs::kAllOrdered;
    } else if (p == "distinct") {
      c.object_cubic_pairs = ObjectCubicPairs::kDistinct;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "object_cubic_pairs must be all-ordered or distinct");
    }
  }
  if (j.contains("n_demos")) c.n_demos = j.at("n_demos").get<int>();
  if (j.contains("demo_counts")) c.demo_counts = j.at("demo_counts").get<std::vector<int>>();
  if (j.contains("horizon")) c.env.horizon = j.at("horizon").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eval_seed")) c.eval_seed = j.at("eval_seed").get<std::uint64_t>();
  if (j.contains("retune_seed")) c.retune_seed = j.at("retune_seed").get<std::uint64_t>();
  if (j.contains("eval_episodes")) c.eval_episodes = j.at("eval_episodes").get<int>();
  if (j.contains("controller")) c.controller = train_config_from_json(j.at("controller"), c.controller);
  if (j.contains("pinv_tol") && !j.at("pinv_tol").is_null()) c.pinv_tol = j.at("pinv_tol").get<double>();
  if (j.contains("rollout_mode")) {
    c.rollout_mode = rollout_mode_from_string(j.at("rollout_mode").get<std::string>());
  }
  if (j.contains("distribution")) {
    c.distribution = distribution_from_string(j.at("distribution").get<std::string>());
  }
  if (j.contains("variation")) c.variation = variation_from_string(j.at("variation").get<std::string>());
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  return c;
}

std::string config_hash(const RunConfig& config) {
  json j = config_to_json(config);
  // Where outputs land and how many threads compute them do not change them.
  j.erase("out_dir");
  j.erase("threads");
  const std::string text = dump_json(j);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int thread_budget(int requested) {
  int budget = std::max(requested, 1);
  if (const char* cap = std::getenv("KOOPMANIX_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit >= 1) budget = std::min(budget, limit);
  }
  return budget;
}

GenDemosResult run_gen_demos(const RunConfig& config, std::ostream* log) {
  config.check();
  const DemoBatch batch = generate_demos(config.env, config.expert, config.n_demos,
                                         config.horizon(), config.seed, config.distribution);
  DemoManifest manifest;
  manifest.env = config.env;
  manifest.seed = config.seed;
  GenDemosResult result;
  result.manifest = save_demos(config.out_dir / "demos", batch.demos, manifest);
  result.expert_success_rate = batch.expert_success_rate;
  write_stamp(config, "gen-demos", {{"expert_success_rate", result.expert_success_rate}});
  log_line(log, "gen-demos: n=" + std::to_string(config.n_demos) + " T=" +
                    std::to_string(config.horizon()) +
                    " expert_success_rate=" + fmt(result.expert_success_rate) +
                    " manifest=" + result.manifest.generic_string());
  return result;
}

FitResult run_fit(const RunConfig& config, const fs::path& demos, std::ostream* log) {
  config.check();
  const LoadedDemos loaded = load_demos(demos, &config.env.layout);
  FitOptions options;
  options.rel_tolerance = config.pinv_tol;
  options.threads = thread_budget(config.threads);
  options.diagnostics = log;
  FitResult result{config.out_dir / "model.json",
                   fit(loaded.demos, config.lifting_spec(), options)};
  save_model(result.model_path, result.model);
  write_stamp(config, "fit", {{"demos", demos.generic_string()}});
  return result;
}

fs::path run_rollout(const RunConfig& config, const fs::path& model_path, std::ostream* log) {
  config.check();
  const KoopmanModel model = load_model(model_path, &config.env.layout);
  const EnvState init = reset(config.env, config.eval_seed, config.distribution);
  const Reference ref = rollout(model, init.composite, config.horizon(), config.rollout_mode);
  const fs::path path = config.out_dir / "reference.csv";
  save_reference_csv(path, ref);
  write_stamp(config, "rollout", {{"model", model_path.generic_string()}});
  log_line(log, "rollout: T=" + std::to_string(config.horizon()) + " mode=" +
                    to_string(config.rollout_mode) + " out=" + path.generic_string());
  return path;
}

TrainResultFiles run_train_controller(const RunConfig& config, const fs::path& demos,
                                      std::ostream* log) {
  config.check();
  const LoadedDemos loaded = load_demos(demos, &config.env.layout);
  TrainResultFiles out;
  out.train_time_s = timing("train-controller", [&] { out.result = train(loaded.demos, config.controller); });
  out.controller_path = config.out_dir / "controller.json";
  out.loss_path = config.out_dir / "loss_history.csv";
  save_controller(out.controller_path, out.result.model);
  save_loss_history_csv(out.loss_path, out.result.loss_history);
  write_stamp(config, "train-controller", {{"demos", demos.generic_string()}});
  log_line(log, "train-controller: samples=" + std::to_string(pair_count(loaded.demos)) +
                    " loss0=" + fmt(out.result.loss_history.front()) +
                    " loss=" + fmt(out.result.loss_history.back()) +
                    " train_time_s=" + fmt(out.train_time_s));
  return out;
}

SimulateReport evaluate_policy(const RunConfig& config, const EnvSpec& env,
                               const KoopmanModel& model, const ControllerModel& controller,
                               std::vector<Trajectory>* executed) {
  const int episodes = config.eval_episodes;
  const int T = config.horizon();
  const SuccessCriterion criterion = default_criterion(env);
  SimulateReport report;
  report.episodes.resize(episodes);
  std::vector<Trajectory> runs(episodes);
  std::vector<std::exception_ptr> failures(episodes);

  auto work = [&](int k) {
    try {
      const std::uint64_t seed = episode_seed(config.eval_seed, k);
      const EnvState init = reset(env, seed, config.distribution);
      Execution exec = execute_policy(model, controller, env, init, T, config.rollout_mode);
      const Trajectory demo = expert_trajectory(env, config.expert, init, T);
      const SuccessResult s = evaluate_success(exec.executed, criterion);
      report.episodes[k] = {seed, s.success, s.rho_sum,
                            imitation_error(robot_path(exec.executed), robot_path(demo))};
      runs[k] = std::move(exec.executed);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };
  // Episodes are independent, so their results do not depend on the split.
  const int hardware = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int threads = std::min(thread_budget(hardware), episodes);
  if (threads <= 1) {
    for (int k = 0; k < episodes; ++k) work(k);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int k = w; k < episodes; k += threads) work(k);
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  double err = 0.0;
  for (const EpisodeReport& e : report.episodes) err += e.imitation_error;
  report.imitation_error = err / episodes;
  report.success_rate = success_rate(runs, criterion);
  if (executed != nullptr) *executed = std::move(runs);
  return report;
}

SimulateReport run_simulate(const RunConfig& config, const fs::path& model_path,
                            const fs::path& controller_path, std::ostream* log) {
  config.check();
  const KoopmanModel model = load_model(model_path, &config.env.layout);
  const ControllerModel controller = load_controller(controller_path, &config.env.layout);
  std::vector<Trajectory> runs;
  const SimulateReport report = evaluate_policy(config, config.env, model, controller, &runs);

  DemonstrationSet executed{config.env.layout, std::move(runs)};
  DemoManifest manifest;
  manifest.env = config.env;
  manifest.seed = config.eval_seed;
  save_demos(config.out_dir / "executed", executed, manifest);
  write_text_file(config.out_dir / "simulate_report.json",
                  dump_json(simulate_report_json(config, config.env, report)));
  write_stamp(config, "simulate", {{"model", model_path.generic_string()},
                                   {"controller", controller_path.generic_string()}});
  log_line(log, "simulate: episodes=" + std::to_string(config.eval_episodes) + " distribution=" +
                    to_string(config.distribution) + " success_rate=" + fmt(report.success_rate) +
                    " imitation_error=" + fmt(report.imitation_error));
  return report;
}

std::vector<EvalRow> run_eval(const RunConfig& config, std::ostream* log) {
  config.check();
  const int largest = *std::max_element(config.demo_counts.begin(), config.demo_counts.end());
  const DemoBatch batch = generate_demos(config.env, config.expert, largest, config.horizon(),
                                         config.seed, Distribution::kIn);
  // One tracking controller shared by every demo count, trained on the
  // largest set.
  const TrainResult trained = train(batch.demos, config.controller);
  const fs::path eval_dir = config.out_dir / "eval";
  save_controller(eval_dir / "controller.json", trained.model);

  FitOptions options;
  options.rel_tolerance = config.pinv_tol;
  options.threads = thread_budget(config.threads);
  std::vector<EvalRow> rows;
  std::string csv = "env,N_demos,seed,train_time_s,imitation_error,success_rate\n";
  for (int count : config.demo_counts) {
    const DemonstrationSet subset = prefix(batch.demos, count);
    std::optional<KoopmanModel> fitted;
    const double seconds = timing("fit", [&] { fitted = fit(subset, config.lifting_spec(), options); });
    const KoopmanModel& model = *fitted;
    save_model(eval_dir / ("model_N" + std::to_string(count) + ".json"), model);
    const SimulateReport report = evaluate_policy(config, config.env, model, trained.model);
    EvalRow row{to_string(config.env.kind), count, config.seed, seconds,
                report.imitation_error, report.success_rate};
    csv += row.env + "," + std::to_string(row.n_demos) + "," + std::to_string(row.seed) + "," +
           fmt(row.train_time_s) + "," + fmt(row.imitation_error) + "," + fmt(row.success_rate) + "\n";
    log_line(log, "eval: N_demos=" + std::to_string(count) + " train_time_s=" + fmt(seconds) +
                      " imitation_error=" + fmt(row.imitation_error) +
                      " success_rate=" + fmt(row.success_rate));
    rows.push_back(std::move(row));
  }
  write_text_file(config.out_dir / "metrics.csv", csv);
  write_stamp(config, "eval", {{"expert_success_rate", batch.expert_success_rate}});
  return rows;
}

RetuneReport run_retune(const RunConfig& config, const fs::path& model_path,
                        const fs::path& controller_path, std::ostream* log) {
  config.check();
  const KoopmanModel model = load_model(model_path, &config.env.layout);
  const ControllerModel original = load_controller(controller_path, &config.env.layout);
  const EnvSpec perturbed = perturb_params(config.env, config.variation);

  RetuneReport report;
  report.variation = to_string(config.variation);
  report.success_unperturbed = evaluate_policy(config, config.env, model, original).success_rate;
  report.success_before = evaluate_policy(config, perturbed, model, original).success_rate;

  // Fresh demonstrations on the perturbed system retrain the controller
  // only; the Koopman model stays frozen.
  const DemoBatch fresh = generate_demos(perturbed, config.expert, config.n_demos, config.horizon(),
                                         config.retune_seed, Distribution::kIn);
  report.expert_success_rate = fresh.expert_success_rate;
  const TrainResult retuned = train(fresh.demos, config.controller);
  report.success_after = evaluate_policy(config, perturbed, model, retuned.model).success_rate;

  report.controller_path = config.out_dir / "controller_retuned.json";
  save_controller(report.controller_path, retuned.model);
  DemoManifest manifest;
  manifest.env = perturbed;
  manifest.seed = config.retune_seed;
  save_demos(config.out_dir / "retune_demos", fresh.demos, manifest);
  write_text_file(config.out_dir / "retune_report.json",
                  dump_json(json{{"variation", report.variation},
                                 {"success_unperturbed", report.success_unperturbed},
                                 {"success_before", report.success_before},
                                 {"success_after", report.success_after},
                                 {"expert_success_rate", report.expert_success_rate},
                                 {"perturbed_env", env_to_json(perturbed)}}));
  write_stamp(config, "retune", {{"model", model_path.generic_string()},
                                 {"controller", controller_path.generic_string()}});
  log_line(log, "retune: variation=" + report.variation +
                    " unperturbed=" + fmt(report.success_unperturbed) +
                    " before=" + fmt(report.success_before) + " after=" + fmt(report.success_after));
  return report;
}

}  // namespace koopmanix
