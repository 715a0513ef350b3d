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

#ifndef KOOPMANIX_PERSIST_HPP
#define KOOPMANIX_PERSIST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "koopmanix/controller.hpp"
#include "koopmanix/envs.hpp"
#include "koopmanix/koopman.hpp"
#include "koopmanix/statespace.hpp"

namespace koopmanix {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses the whole of `text` as a double. Throws Error(kMalformedFile).
double parse_double(std::string_view text);

/// JSON text with every floating-point number written by format_double.
/// Floats that would read back as integers get a trailing ".0".
std::string dump_json(const nlohmann::json& value);

/// Parses a JSON file. Errors name the file, line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

nlohmann::json layout_to_json(const StateLayout& layout);
StateLayout layout_from_json(const nlohmann::json& j);

nlohmann::json env_to_json(const EnvSpec& spec);
/// Starts from make_env(kind) and overrides every field present in `j`.
EnvSpec env_from_json(const nlohmann::json& j);

nlohmann::json lifting_to_json(const LiftingSpec& spec);
LiftingSpec lifting_from_json(const nlohmann::json& j, const StateLayout& layout);

struct DemoManifest {
  std::optional<EnvSpec> env;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> files;  ///< filled on save and on load
};

/// Writes `manifest.json` and one `traj_NNNN.csv` per trajectory into
/// `dir`, which is created when missing. Returns the manifest path.
std::filesystem::path save_demos(const std::filesystem::path& dir, const DemonstrationSet& demos,
                                 DemoManifest manifest = {});

struct LoadedDemos {
  DemonstrationSet demos;
  DemoManifest manifest;
};

/// `path` is a manifest file or a directory holding `manifest.json`.
LoadedDemos load_demos(const std::filesystem::path& path,
                       const StateLayout* expected = nullptr);

/// Reads a single trajectory CSV against `layout`.
Trajectory load_trajectory_csv(const std::filesystem::path& path, const StateLayout& layout);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                         const StateLayout& layout);

void save_model(const std::filesystem::path& path, const KoopmanModel& model);
KoopmanModel load_model(const std::filesystem::path& path,
                        const StateLayout* expected = nullptr);
nlohmann::json model_to_json(const KoopmanModel& model);
KoopmanModel model_from_json(const nlohmann::json& j);

void save_controller(const std::filesystem::path& path, const ControllerModel& controller);
ControllerModel load_controller(const std::filesystem::path& path,
                                const StateLayout* expected = nullptr);
nlohmann::json controller_to_json(const ControllerModel& controller);
ControllerModel controller_from_json(const nlohmann::json& j);

/// Columns t, xr_*, xo_*; t is 1-based.
void save_reference_csv(const std::filesystem::path& path, const Reference& reference);

/// Columns iteration, loss.
void save_loss_history_csv(const std::filesystem::path& path, const std::vector<double>& history);

}  // namespace koopmanix

#endif  // KOOPMANIX_PERSIST_HPP
