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

#include "koopmanix/persist.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "koopmanix/error.hpp"

namespace koopmanix {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";

[[noreturn]] void malformed(const fs::path& file, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, file.string() + ": " + what);
}

[[noreturn]] void malformed_at(const fs::path& file, std::size_t line, std::size_t col,
                               const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, file.string() + ":" + std::to_string(line) + ":" +
                                             std::to_string(col) + ": " + what);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_dims(const StateLayout& a, const StateLayout& b) {
  return a.n == b.n && a.m == b.m && a.a == b.a;
}

void require_layout(const fs::path& file, const StateLayout& found, const StateLayout* expected) {
  if (expected != nullptr && !same_dims(found, *expected)) {
    throw Error(ErrorCode::kLayoutMismatch,
                file.string() + ": layout (n=" + std::to_string(found.n) + ", m=" +
                    std::to_string(found.m) + ", a=" + std::to_string(found.a) +
                    ") does not match the expected (n=" + std::to_string(expected->n) +
                    ", m=" + std::to_string(expected->m) + ", a=" + std::to_string(expected->a) +
                    ")");
  }
}

void check_header(const json& j, const std::string& kind) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedFile, "top level is not an object");
  if (!j.contains("schema_version")) {
    throw Error(ErrorCode::kSchemaMismatch, "missing schema_version");
  }
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaMismatch, "schema_version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kSchemaVersion) + ")");
  }
  const std::string found = j.at("kind").get<std::string>();
  if (found != kind) {
    throw Error(ErrorCode::kSchemaMismatch, "file kind is '" + found + "', expected '" + kind + "'");
  }
}

// Runs `fn`, rewriting JSON access failures and library errors so that they
// name the file.
template <typename Fn>
auto with_file_context(const fs::path& file, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    malformed(file, e.what());
  } catch (const NonFiniteError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.what());
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorCode::kMalformedFile, name + " must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::kMalformedFile, name + " row " + std::to_string(i) + " must have " +
                                                 std::to_string(cols) + " entries");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[k].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw Error(ErrorCode::kMalformedFile, name + " must have " + std::to_string(size) + " entries");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = j[i].get<double>();
  return v;
}

void dump_value(const json& v, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_value(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      bool flat = true;
      for (const json& e : v) flat = flat && !e.is_structured();
      if (v.empty()) {
        out += "[]";
      } else if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i > 0) out += ", ";
          dump_value(v[i], out, depth + 1);
        }
        out += "]";
      } else {
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i > 0) out += ",\n";
          out += pad;
          dump_value(v[i], out, depth + 1);
        }
        out += "\n" + close + "]";
      }
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        throw Error(ErrorCode::kNonFinite, "cannot write a non-finite number to JSON");
      }
      std::string s = format_double(d);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += v.dump();
  }
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<std::string> csv_header(const StateLayout& layout) {
  std::vector<std::string> h{"t"};
  for (int i = 0; i < layout.n; ++i) h.push_back("xr_" + std::to_string(i));
  for (int i = 0; i < layout.m; ++i) h.push_back("xo_" + std::to_string(i));
  for (int i = 0; i < layout.a; ++i) h.push_back("tau_" + std::to_string(i));
  return h;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ',';
    out += parts[i];
  }
  return out;
}

// Splits a line on commas, recording the 1-based column where each field starts.
std::vector<std::pair<std::string_view, std::size_t>> split_fields(std::string_view line) {
  std::vector<std::pair<std::string_view, std::size_t>> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
    fields.emplace_back(line.substr(start, stop - start), start + 1);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string demo_file_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%04d.csv", k);
  return buf;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto result = std::from_chars(first, last, value);
  if (text.empty() || result.ec != std::errc() || result.ptr != last) {
    throw Error(ErrorCode::kMalformedFile, "'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string dump_json(const json& value) {
  std::string out;
  dump_value(value, out, 0);
  out += '\n';
  return out;
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    malformed_at(path, line, col, e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

json layout_to_json(const StateLayout& layout) {
  return json{{"n", layout.n},
              {"m", layout.m},
              {"a", layout.a},
              {"robot_names", layout.robot_names},
              {"object_names", layout.object_names}};
}

StateLayout layout_from_json(const json& j) {
  StateLayout l;
  l.n = j.at("n").get<int>();
  l.m = j.at("m").get<int>();
  l.a = j.at("a").get<int>();
  if (j.contains("robot_names")) l.robot_names = j.at("robot_names").get<std::vector<std::string>>();
  if (j.contains("object_names")) l.object_names = j.at("object_names").get<std::vector<std::string>>();
  l.check();
  return l;
}

json env_to_json(const EnvSpec& spec) {
  json samplers = json::array();
  for (const ParamSampler& s : spec.samplers) {
    json in = json::array();
    json out = json::array();
    for (const Interval& r : s.in) in.push_back({r.lo, r.hi});
    for (const Interval& r : s.out) out.push_back({r.lo, r.hi});
    samplers.push_back({{"name", s.name}, {"in", in}, {"out", out}});
  }
  json params = json::object();
  for (const auto& [name, value] : spec.params) params[name] = value;
  return json{{"kind", to_string(spec.kind)},
              {"dt", spec.dt},
              {"horizon", spec.horizon},
              {"params", params},
              {"samplers", samplers}};
}

EnvSpec env_from_json(const json& j) {
  EnvSpec spec = make_env(env_kind_from_string(j.at("kind").get<std::string>()));
  if (j.contains("dt")) spec.dt = j.at("dt").get<double>();
  if (j.contains("horizon")) spec.horizon = j.at("horizon").get<int>();
  if (j.contains("params")) {
    for (const auto& [name, value] : j.at("params").items()) spec.params[name] = value.get<double>();
  }
  if (j.contains("samplers")) {
    spec.samplers.clear();
    for (const json& s : j.at("samplers")) {
      ParamSampler sampler;
      sampler.name = s.at("name").get<std::string>();
      for (const json& r : s.at("in")) sampler.in.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
      for (const json& r : s.at("out")) sampler.out.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
      spec.samplers.push_back(std::move(sampler));
    }
  }
  spec.check();
  return spec;
}

json lifting_to_json(const LiftingSpec& spec) {
  json j{{"kind", to_string(spec.kind())},
         {"n", spec.layout().n},
         {"m", spec.layout().m},
         {"ordering", spec.ordering_tag()}};
  if (spec.kind() == LiftingKind::kMonomialList) j["monomials"] = spec.monomials();
  return j;
}

LiftingSpec lifting_from_json(const json& j, const StateLayout& layout) {
  if (j.at("n").get<int>() != layout.n || j.at("m").get<int>() != layout.m) {
    throw Error(ErrorCode::kLayoutMismatch, "lifting dimensions do not match the layout");
  }
  const LiftingKind kind = lifting_kind_from_string(j.at("kind").get<std::string>());
  const std::string tag = j.at("ordering").get<std::string>();
  LiftingSpec spec = LiftingSpec::identity(layout);
  switch (kind) {
    case LiftingKind::kIdentity:
      break;
    case LiftingKind::kKodexPolynomial:
      spec = LiftingSpec::kodex(layout, tag == LiftingSpec::kodex(layout, ObjectCubicPairs::kDistinct).ordering_tag()
                                            ? ObjectCubicPairs::kDistinct
                                            : ObjectCubicPairs::kAllOrdered);
      break;
    case LiftingKind::kMonomialList:
      spec = LiftingSpec::monomial_list(layout, j.at("monomials").get<std::vector<Monomial>>());
      break;
  }
  if (spec.ordering_tag() != tag) {
    throw Error(ErrorCode::kSchemaMismatch, "lifting ordering '" + tag +
                                                "' is not understood; this build writes '" +
                                                spec.ordering_tag() + "'");
  }
  return spec;
}

void save_trajectory_csv(const fs::path& path, const Trajectory& traj, const StateLayout& layout) {
  std::string text = join(csv_header(layout)) + "\n";
  for (int t = 0; t < traj.horizon(); ++t) {
    const CompositeState& s = traj.states[t];
    if (!s.conforms_to(layout)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "state " + std::to_string(t) + " does not conform to the layout");
    }
    text += std::to_string(t + 1);
    for (Eigen::Index i = 0; i < s.robot.size(); ++i) text += "," + format_double(s.robot[i]);
    for (Eigen::Index i = 0; i < s.object.size(); ++i) text += "," + format_double(s.object[i]);
    const bool has_tau = traj.has_torques() && t + 1 < traj.horizon();
    for (int i = 0; i < layout.a; ++i) {
      text += ",";
      if (has_tau) text += format_double(traj.torques[t][i]);
    }
    text += "\n";
  }
  write_text_file(path, text);
}

Trajectory load_trajectory_csv(const fs::path& path, const StateLayout& layout) {
  const std::string text = read_text(path);
  const std::vector<std::string> header = csv_header(layout);
  const std::size_t width = header.size();

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) malformed_at(path, 1, 1, "empty file");

  const auto head = split_fields(lines[0]);
  if (head.size() != width) {
    malformed_at(path, 1, 1, "header has " + std::to_string(head.size()) + " columns, expected " +
                                 std::to_string(width));
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (head[c].first != header[c]) {
      malformed_at(path, 1, head[c].second, "expected column '" + header[c] + "', found '" +
                                                 std::string(head[c].first) + "'");
    }
  }

  Trajectory traj;
  const int rows = static_cast<int>(lines.size()) - 1;
  bool torques_present = false;
  for (int r = 0; r < rows; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != width) {
      malformed_at(path, line_no, 1, "row has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(width));
    }
    auto number = [&](std::size_t c) {
      try {
        return parse_double(fields[c].first);
      } catch (const Error& e) {
        malformed_at(path, line_no, fields[c].second, e.what());
      }
    };
    const double t = number(0);
    if (t != r + 1) {
      malformed_at(path, line_no, 1, "time index " + std::string(fields[0].first) +
                                         " out of sequence, expected " + std::to_string(r + 1));
    }
    CompositeState s;
    s.robot.resize(layout.n);
    s.object.resize(layout.m);
    std::size_t c = 1;
    for (int i = 0; i < layout.n; ++i) s.robot[i] = number(c++);
    for (int i = 0; i < layout.m; ++i) s.object[i] = number(c++);
    int empty = 0;
    for (std::size_t k = c; k < width; ++k) empty += fields[k].first.empty() ? 1 : 0;
    const bool last = r + 1 == rows;
    if (empty != 0 && empty != layout.a) {
      malformed_at(path, line_no, fields[c].second, "torque cells are partially empty");
    }
    if (last && empty == 0) {
      malformed_at(path, line_no, fields[c].second, "final row must leave torque cells empty");
    }
    if (!last) {
      if (r == 0) torques_present = empty == 0;
      if (torques_present != (empty == 0)) {
        malformed_at(path, line_no, fields[c].second, "torques must be given on every row but the last, or on none");
      }
      if (torques_present) {
        Eigen::VectorXd tau(layout.a);
        for (int i = 0; i < layout.a; ++i) tau[i] = number(c++);
        traj.torques.push_back(std::move(tau));
      }
    }
    traj.states.push_back(std::move(s));
  }
  return traj;
}

fs::path save_demos(const fs::path& dir, const DemonstrationSet& demos, DemoManifest manifest) {
  require_valid(demos);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  manifest.files.clear();
  for (int k = 0; k < demos.size(); ++k) {
    const std::string name = demo_file_name(k);
    save_trajectory_csv(dir / name, demos.trajectories[k], demos.layout);
    manifest.files.push_back(name);
  }
  json j{{"schema_version", kSchemaVersion},
         {"kind", "koopmanix-demos"},
         {"layout", layout_to_json(demos.layout)},
         {"trajectories", manifest.files},
         {"env", manifest.env ? env_to_json(*manifest.env) : json(nullptr)},
         {"seed", manifest.seed ? json(*manifest.seed) : json(nullptr)}};
  const fs::path path = dir / kManifestName;
  write_text_file(path, dump_json(j));
  return path;
}

LoadedDemos load_demos(const fs::path& path, const StateLayout* expected) {
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  const json j = read_json_file(manifest_path);
  LoadedDemos out;
  with_file_context(manifest_path, [&] {
    check_header(j, "koopmanix-demos");
    out.demos.layout = layout_from_json(j.at("layout"));
    out.manifest.files = j.at("trajectories").get<std::vector<std::string>>();
    if (!j.at("env").is_null()) out.manifest.env = env_from_json(j.at("env"));
    if (!j.at("seed").is_null()) out.manifest.seed = j.at("seed").get<std::uint64_t>();
    return 0;
  });
  require_layout(manifest_path, out.demos.layout, expected);
  const fs::path base = manifest_path.parent_path();
  for (const std::string& name : out.manifest.files) {
    out.demos.trajectories.push_back(load_trajectory_csv(base / name, out.demos.layout));
  }
  const ValidationReport report = validate(out.demos);
  if (!report.ok()) malformed(manifest_path, report.summary());
  return out;
}

json model_to_json(const KoopmanModel& model) {
  const FitMeta& m = model.meta;
  return json{{"schema_version", kSchemaVersion},
              {"kind", "koopmanix-model"},
              {"layout", layout_to_json(model.layout())},
              {"lifting", lifting_to_json(model.spec)},
              {"p", model.p()},
              {"K", matrix_to_json(model.K)},
              {"fit_meta",
               {{"n_demos", m.n_demos},
                {"total_pairs", m.total_pairs},
                {"wall_time_s", m.wall_time_s},
                {"rank", m.rank},
                {"condition_number", m.condition_number},
                {"rel_tolerance", m.rel_tolerance}}}};
}

KoopmanModel model_from_json(const json& j) {
  check_header(j, "koopmanix-model");
  const StateLayout layout = layout_from_json(j.at("layout"));
  LiftingSpec spec = lifting_from_json(j.at("lifting"), layout);
  const int p = dimension(spec);
  if (j.at("p").get<int>() != p) {
    throw Error(ErrorCode::kSchemaMismatch, "stored p does not match the lifting dimension " +
                                                std::to_string(p));
  }
  KoopmanModel model{matrix_from_json(j.at("K"), p, p, "K"), std::move(spec), {}};
  if (!model.K.allFinite()) throw Error(ErrorCode::kMalformedFile, "K has non-finite entries");
  const json& m = j.at("fit_meta");
  model.meta.n_demos = m.at("n_demos").get<int>();
  model.meta.total_pairs = m.at("total_pairs").get<int>();
  model.meta.wall_time_s = m.at("wall_time_s").get<double>();
  model.meta.rank = m.at("rank").get<int>();
  model.meta.condition_number = m.at("condition_number").get<double>();
  model.meta.rel_tolerance = m.at("rel_tolerance").get<double>();
  return model;
}

void save_model(const fs::path& path, const KoopmanModel& model) {
  write_text_file(path, dump_json(model_to_json(model)));
}

KoopmanModel load_model(const fs::path& path, const StateLayout* expected) {
  const json j = read_json_file(path);
  KoopmanModel model = with_file_context(path, [&] { return model_from_json(j); });
  require_layout(path, model.layout(), expected);
  return model;
}

json controller_to_json(const ControllerModel& c) {
  json weights = json::array();
  json biases = json::array();
  for (int l = 0; l < c.layer_count(); ++l) {
    weights.push_back(matrix_to_json(c.weights[l]));
    biases.push_back(vector_to_json(c.biases[l]));
  }
  return json{{"schema_version", kSchemaVersion},
              {"kind", "koopmanix-controller"},
              {"layer_sizes", c.layer_sizes},
              {"hidden_activation", "relu"},
              {"output_activation", "identity"},
              {"weights", weights},
              {"biases", biases},
              {"input_mean", vector_to_json(c.input_mean)},
              {"input_std", vector_to_json(c.input_std)}};
}

ControllerModel controller_from_json(const json& j) {
  check_header(j, "koopmanix-controller");
  if (j.at("hidden_activation").get<std::string>() != "relu" ||
      j.at("output_activation").get<std::string>() != "identity") {
    throw Error(ErrorCode::kSchemaMismatch, "only relu hidden / identity output is supported");
  }
  ControllerModel c;
  c.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (c.layer_sizes.size() < 2) throw Error(ErrorCode::kMalformedFile, "layer_sizes too short");
  const std::size_t L = c.layer_sizes.size() - 1;
  const json& w = j.at("weights");
  const json& b = j.at("biases");
  if (w.size() != L || b.size() != L) {
    throw Error(ErrorCode::kMalformedFile, "expected " + std::to_string(L) + " layers");
  }
  for (std::size_t l = 0; l < L; ++l) {
    const std::string tag = "layer " + std::to_string(l);
    c.weights.push_back(matrix_from_json(w[l], c.layer_sizes[l + 1], c.layer_sizes[l], tag + " weights"));
    c.biases.push_back(vector_from_json(b[l], c.layer_sizes[l + 1], tag + " biases"));
  }
  c.input_mean = vector_from_json(j.at("input_mean"), c.layer_sizes.front(), "input_mean");
  c.input_std = vector_from_json(j.at("input_std"), c.layer_sizes.front(), "input_std");
  c.check();
  return c;
}

void save_controller(const fs::path& path, const ControllerModel& controller) {
  controller.check();
  write_text_file(path, dump_json(controller_to_json(controller)));
}

ControllerModel load_controller(const fs::path& path, const StateLayout* expected) {
  const json j = read_json_file(path);
  ControllerModel c = with_file_context(path, [&] { return controller_from_json(j); });
  if (expected != nullptr &&
      (c.robot_dim() != expected->n || c.action_dim() != expected->a)) {
    throw Error(ErrorCode::kLayoutMismatch,
                path.string() + ": controller maps 2x" + std::to_string(c.robot_dim()) + " -> " +
                    std::to_string(c.action_dim()) + ", expected 2x" + std::to_string(expected->n) +
                    " -> " + std::to_string(expected->a));
  }
  return c;
}

void save_reference_csv(const fs::path& path, const Reference& reference) {
  const int n = reference.horizon() > 0 ? static_cast<int>(reference.robot[0].size()) : 0;
  const int m = reference.horizon() > 0 ? static_cast<int>(reference.object[0].size()) : 0;
  std::vector<std::string> head{"t"};
  for (int i = 0; i < n; ++i) head.push_back("xr_" + std::to_string(i));
  for (int i = 0; i < m; ++i) head.push_back("xo_" + std::to_string(i));
  std::string text = join(head) + "\n";
  for (int t = 0; t < reference.horizon(); ++t) {
    text += std::to_string(t + 1);
    for (int i = 0; i < n; ++i) text += "," + format_double(reference.robot[t][i]);
    for (int i = 0; i < m; ++i) text += "," + format_double(reference.object[t][i]);
    text += "\n";
  }
  write_text_file(path, text);
}

void save_loss_history_csv(const fs::path& path, const std::vector<double>& history) {
  std::string text = "iteration,loss\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    text += std::to_string(k) + "," + format_double(history[k]) + "\n";
  }
  write_text_file(path, text);
}

}  // namespace koopmanix
