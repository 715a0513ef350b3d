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

#include <filesystem>

#include <gtest/gtest.h>

#include "cli_support.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace koopmanix {
namespace {

namespace fs = std::filesystem;
using testing::CliRun;

const std::string kCli = KOOPMANIX_CLI_PATH;
const fs::path kSmall = fs::path(KOOPMANIX_FIXTURE_DIR) / "config_small.json";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = testing::fresh_temp_dir(std::string("cli_") + info->name());
  }

  CliRun run(std::vector<std::string> args) {
    return testing::run_cli(kCli, args, dir_ / "io");
  }

  // Runs a subcommand against the small config inside out().
  CliRun small(const std::string& cmd, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {cmd, "--config", kSmall.string(), "--out-dir", out().string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  fs::path out() const { return dir_ / "run"; }

  nlohmann::json stamp(const std::string& cmd) const {
    return nlohmann::json::parse(testing::slurp(out() / (cmd + ".stamp.json")));
  }

  nlohmann::json error_of(const CliRun& r) const {
    EXPECT_EQ(r.err.find('\n'), r.err.size() - 1) << "error must be one line: " << r.err;
    return nlohmann::json::parse(r.err);
  }

  fs::path dir_;
};

TEST_F(Cli, PipelineSubcommandsChainThroughFiles) {
  CliRun r = small("gen-demos");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out() / "demos" / "manifest.json"));

  r = small("fit");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* key : {"pairs=", "p=", "rank=", "wall_time_s="}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << r.out;
  }
  EXPECT_TRUE(fs::exists(out() / "model.json"));

  r = small("rollout", {"--rollout-mode", "relift"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out() / "reference.csv"));

  r = small("train-controller");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out() / "controller.json"));
  EXPECT_TRUE(fs::exists(out() / "loss_history.csv"));

  for (const char* dist : {"in", "out"}) {
    r = small("simulate", {"--distribution", dist});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto report = nlohmann::json::parse(testing::slurp(out() / "simulate_report.json"));
    EXPECT_EQ(report["distribution"], dist);
    EXPECT_EQ(report["episodes"], 4);
    EXPECT_EQ(report["per_episode"].size(), 4u);
    EXPECT_GE(report["success_rate"].get<double>(), 0.0);
  }

  // Every subcommand leaves a stamp; the rollout override changes the hash.
  const auto gen = stamp("gen-demos");
  EXPECT_EQ(gen["command"], "gen-demos");
  EXPECT_EQ(gen["seeds"]["seed"], 7);
  EXPECT_EQ(gen["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(stamp("fit")["config_hash"], gen["config_hash"]);
  EXPECT_EQ(stamp("train-controller")["config_hash"], gen["config_hash"]);
  EXPECT_NE(stamp("rollout")["config_hash"], gen["config_hash"]);
  EXPECT_TRUE(stamp("simulate")["versions"].contains("eigen"));
}

TEST_F(Cli, EvalWritesOneRowPerDemoCount) {
  const CliRun r = small("eval");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream csv(testing::slurp(out() / "metrics.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "env,N_demos,seed,train_time_s,imitation_error,success_rate");
  EXPECT_EQ(lines[1].rfind("pendulum,3,7,", 0), 0u) << lines[1];
  EXPECT_EQ(lines[2].rfind("pendulum,5,7,", 0), 0u) << lines[2];
  EXPECT_TRUE(fs::exists(out() / "eval.stamp.json"));
}

TEST_F(Cli, RetuneOnRelocation) {
  const fs::path cfg = dir_ / "reloc.json";
  std::ofstream(cfg) << R"({"env": "pointmass-relocation", "n_demos": 6, "eval_episodes": 3,
                           "controller": {"iterations": 3}})";
  for (const char* cmd : {"gen-demos", "fit", "train-controller", "retune"}) {
    const CliRun r = run({cmd, "--config", cfg.string(), "--out-dir", out().string()});
    ASSERT_EQ(r.exit_code, 0) << cmd << ": " << r.err;
  }
  EXPECT_TRUE(fs::exists(out() / "controller_retuned.json"));
  const auto report = nlohmann::json::parse(testing::slurp(out() / "retune_report.json"));
  EXPECT_EQ(report["variation"], "heavy-hand");
  for (const char* key : {"success_unperturbed", "success_before", "success_after"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
}

TEST_F(Cli, Determinism) {
  auto pipeline = [&] {
    for (const char* cmd : {"gen-demos", "fit", "rollout", "train-controller", "simulate", "eval"}) {
      const CliRun r = small(cmd);
      EXPECT_EQ(r.exit_code, 0) << cmd << ": " << r.err;
    }
    return testing::snapshot(out());
  };
  const auto first = pipeline();
  fs::remove_all(out());
  const auto second = pipeline();
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, content] : first) {
    ASSERT_TRUE(second.count(name)) << name;
    EXPECT_EQ(content, second.at(name)) << name;
  }
}

TEST_F(Cli, MissingInputIsOneLineJsonError) {
  const CliRun r = small("fit", {"--demos", (dir_ / "nowhere").string()});
  EXPECT_EQ(r.exit_code, 1);
  const auto err = error_of(r);
  EXPECT_EQ(err["error"], "io");
  EXPECT_FALSE(err["message"].get<std::string>().empty());
}

TEST_F(Cli, LayoutMismatchIsReported) {
  ASSERT_EQ(small("gen-demos").exit_code, 0);
  ASSERT_EQ(small("fit").exit_code, 0);
  const CliRun r = small("rollout", {"--env", "linear"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_of(r)["error"], "layout_mismatch");
}

TEST_F(Cli, RetuneRejectsUnsupportedEnv) {
  ASSERT_EQ(small("gen-demos").exit_code, 0);
  ASSERT_EQ(small("fit").exit_code, 0);
  ASSERT_EQ(small("train-controller").exit_code, 0);
  const CliRun r = small("retune");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_of(r)["error"], "unsupported");
}

TEST_F(Cli, UsageErrors) {
  CliRun r = run({"fit", "--lifting", "fourier"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(error_of(r)["error"], "usage");
  r = run({});
  EXPECT_EQ(r.exit_code, 2);
  r = run({"eval", "--config", (dir_ / "absent.json").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_of(r)["error"], "io");
}

TEST_F(Cli, MalformedConfig) {
  const fs::path cfg = dir_ / "bad.json";
  std::ofstream(cfg) << "{\"seed\": 3,\n \"n_demos\": }";
  const CliRun r = run({"gen-demos", "--config", cfg.string(), "--out-dir", out().string()});
  EXPECT_EQ(r.exit_code, 1);
  const auto err = error_of(r);
  EXPECT_EQ(err["error"], "malformed_file");
  EXPECT_NE(err["message"].get<std::string>().find("bad.json:2:"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace koopmanix
