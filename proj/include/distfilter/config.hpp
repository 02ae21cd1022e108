// Copyright 2026 The distfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "distfilter/trajectory.hpp"

namespace distfilter {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed experiment document.
///
///   hamiltonian: n (4), coupling (1), field_x (1), field_z (1), shift (0),
///                matrix (optional square complex matrix; replaces the Ising model)
///   initial:     kind (plus-product | minus-product | theta-product |
///                eigenstate-index | explicit-amplitudes), theta, index, amplitudes
///   protocol:    s (2), K (25), policy (weak), phase_mode (iid-uniform),
///                window {t_min (1), t_max (1001)}, restart_mode (survival),
///                max_restarts (1000000)
///   run:         trials (10000, or 100000 for strong), seed (1),
///                output_path (results.csv), shards (64)
///
/// Complex numbers are written as a number or a [re, im] pair.
struct ExperimentFile {
  ProtocolConfig protocol;
  std::string output_path = "results.csv";
  Json source;  // document after overrides, before defaults
};

namespace config_detail {

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + "." + key + ": unknown key");
  }
}

template <typename T>
T get(const Json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) throw ConfigError("");
      }
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + ": wrong type (got " + v.dump() + ")");
  }
}

inline Complex complex_value(const Json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + ": expected a number or [re, im]");
}

inline ComplexVector complex_vector(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  ComplexVector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(complex_value(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline DenseMatrix complex_matrix(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  DenseMatrix m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    const ComplexVector row = complex_vector(v[static_cast<std::size_t>(r)], rw);
    if (static_cast<Eigen::Index>(row.size()) != rows) throw ConfigError(rw + ": matrix must be square");
    for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline InitialKind parse_initial_kind(const std::string& s, const std::string& where) {
  if (s == "plus-product") return InitialKind::plus_product;
  if (s == "minus-product") return InitialKind::minus_product;
  if (s == "theta-product") return InitialKind::theta_product;
  if (s == "eigenstate-index") return InitialKind::eigenstate_index;
  if (s == "explicit-amplitudes") return InitialKind::explicit_amplitudes;
  throw ConfigError(where + ": unknown initial kind '" + s + "'");
}

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace config_detail

inline std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::plus_product: return "plus-product";
    case InitialKind::minus_product: return "minus-product";
    case InitialKind::theta_product: return "theta-product";
    case InitialKind::eigenstate_index: return "eigenstate-index";
    case InitialKind::explicit_amplitudes: return "explicit-amplitudes";
  }
  return "?";
}

inline ExperimentFile parse_experiment(const Json& doc) {
  using namespace config_detail;
  check_keys(doc, "config", {"hamiltonian", "initial", "protocol", "run"});
  ExperimentFile ex;
  ex.source = doc;
  ProtocolConfig& p = ex.protocol;

  const Json empty = Json::object();
  const Json& h = doc.contains("hamiltonian") ? doc.at("hamiltonian") : empty;
  check_keys(h, "hamiltonian", {"n", "coupling", "field_x", "field_z", "shift", "matrix"});
  p.hamiltonian.n = get<int>(h, "hamiltonian", "n", p.hamiltonian.n);
  p.hamiltonian.coupling = get<double>(h, "hamiltonian", "coupling", p.hamiltonian.coupling);
  p.hamiltonian.field_x = get<double>(h, "hamiltonian", "field_x", p.hamiltonian.field_x);
  p.hamiltonian.field_z = get<double>(h, "hamiltonian", "field_z", p.hamiltonian.field_z);
  p.hamiltonian.shift = get<double>(h, "hamiltonian", "shift", p.hamiltonian.shift);
  if (h.contains("matrix")) {
    DenseMatrix m = complex_matrix(h.at("matrix"), "hamiltonian.matrix");
    const auto dim = static_cast<std::size_t>(m.rows());
    if ((dim & (dim - 1)) != 0 || dim > (std::size_t{1} << kMaxQubits)) {
      throw ConfigError("hamiltonian.matrix: dimension must be a power of two up to 2^8");
    }
    if (h.contains("n") && (std::size_t{1} << p.hamiltonian.n) != dim) {
      throw ConfigError("hamiltonian.n: does not match the matrix dimension");
    }
    p.hamiltonian_matrix = std::move(m);
  }

  const Json& in = doc.contains("initial") ? doc.at("initial") : empty;
  check_keys(in, "initial", {"kind", "theta", "index", "amplitudes"});
  p.initial.kind = parse_initial_kind(get<std::string>(in, "initial", "kind", "plus-product"), "initial.kind");
  p.initial.theta = get<double>(in, "initial", "theta", 0.0);
  p.initial.index = get<std::size_t>(in, "initial", "index", 0);
  if (in.contains("amplitudes")) p.initial.amplitudes = complex_vector(in.at("amplitudes"), "initial.amplitudes");
  if (p.initial.kind == InitialKind::theta_product && !in.contains("theta")) {
    throw ConfigError("initial.theta: required for theta-product");
  }
  if (p.initial.kind == InitialKind::eigenstate_index && !in.contains("index")) {
    throw ConfigError("initial.index: required for eigenstate-index");
  }
  if (p.initial.kind == InitialKind::explicit_amplitudes && !in.contains("amplitudes")) {
    throw ConfigError("initial.amplitudes: required for explicit-amplitudes");
  }

  const Json& pr = doc.contains("protocol") ? doc.at("protocol") : empty;
  check_keys(pr, "protocol", {"s", "K", "policy", "phase_mode", "window", "restart_mode", "max_restarts"});
  p.devices = get<int>(pr, "protocol", "s", p.devices);
  p.iterations = get<int>(pr, "protocol", "K", p.iterations);
  p.policy = wrap("protocol.policy", [&] { return parse_policy(get<std::string>(pr, "protocol", "policy", "weak")); });
  p.phase_mode = wrap("protocol.phase_mode",
                      [&] { return parse_phase_mode(get<std::string>(pr, "protocol", "phase_mode", "iid-uniform")); });
  if (pr.contains("window")) {
    const Json& w = pr.at("window");
    check_keys(w, "protocol.window", {"t_min", "t_max"});
    p.window.t_min = get<double>(w, "protocol.window", "t_min", p.window.t_min);
    p.window.t_max = get<double>(w, "protocol.window", "t_max", p.window.t_max);
  }
  p.restart_mode = wrap("protocol.restart_mode", [&] {
    return parse_restart_mode(get<std::string>(pr, "protocol", "restart_mode", "survival"));
  });
  p.max_restarts = get<std::uint64_t>(pr, "protocol", "max_restarts", p.max_restarts);

  const Json& run = doc.contains("run") ? doc.at("run") : empty;
  check_keys(run, "run", {"trials", "seed", "output_path", "shards"});
  const std::size_t default_trials = p.policy == PostselectionPolicy::strong ? 100000 : 10000;
  p.trials = get<std::size_t>(run, "run", "trials", default_trials);
  p.seed = get<std::uint64_t>(run, "run", "seed", p.seed);
  p.shards = get<std::size_t>(run, "run", "shards", p.shards);
  ex.output_path = get<std::string>(run, "run", "output_path", ex.output_path);

  // guards run here, before anything is built
  wrap("protocol", [&] {
    p.validate();
    return 0;
  });
  return ex;
}

/// Line and column of a byte offset, for parse diagnostics.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline Json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

/// Sets a dotted path ("protocol.K") in the document. The value is read as
/// JSON when possible and as a plain string otherwise.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "': empty path component");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': path crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

inline ExperimentFile load_experiment(const std::string& path, const std::vector<std::string>& overrides = {}) {
  Json doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_experiment(doc);
}

/// Fully resolved configuration, defaults included.
inline Json config_echo(const ExperimentFile& ex) {
  const ProtocolConfig& p = ex.protocol;
  Json h = {{"n", p.qubits()},
            {"coupling", p.hamiltonian.coupling},
            {"field_x", p.hamiltonian.field_x},
            {"field_z", p.hamiltonian.field_z},
            {"shift", p.hamiltonian.shift}};
  if (p.hamiltonian_matrix) h["matrix"] = ex.source.at("hamiltonian").at("matrix");
  Json in = {{"kind", std::string(to_string(p.initial.kind))}};
  if (p.initial.kind == InitialKind::theta_product) in["theta"] = p.initial.theta;
  if (p.initial.kind == InitialKind::eigenstate_index) in["index"] = p.initial.index;
  if (p.initial.kind == InitialKind::explicit_amplitudes) in["amplitudes"] = ex.source.at("initial").at("amplitudes");
  return Json{{"hamiltonian", h},
              {"initial", in},
              {"protocol",
               {{"s", p.devices},
                {"K", p.iterations},
                {"policy", std::string(to_string(p.policy))},
                {"phase_mode", std::string(to_string(p.phase_mode))},
                {"window", {{"t_min", p.window.t_min}, {"t_max", p.window.t_max}}},
                {"restart_mode", std::string(to_string(p.restart_mode))},
                {"max_restarts", p.max_restarts}}},
              {"run", {{"trials", p.trials}, {"seed", p.seed}, {"output_path", ex.output_path}, {"shards", p.shards}}}};
}

}  // namespace distfilter
