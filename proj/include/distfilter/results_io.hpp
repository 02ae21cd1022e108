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

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "distfilter/config.hpp"
#include "distfilter/ensemble.hpp"

namespace distfilter {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr std::array<const char*, 12> kResultsColumns = {
    "k",          "survivors",   "success_rate", "mean_var",       "se_var",          "mean_energy",
    "se_energy",  "mean_h2",     "spread_v",     "ctrl_evos_mean", "bell_pairs_mean", "cost_per_state"};

/// One parsed CSV row; blank cells are nullopt.
struct ResultRow {
  int k = 0;
  std::uint64_t survivors = 0;
  std::array<std::optional<double>, 10> values{};  // columns after `survivors`

  std::optional<double> get(std::string_view column) const {
    for (std::size_t c = 2; c < kResultsColumns.size(); ++c) {
      if (column == kResultsColumns[c]) return values[c - 2];
    }
    if (column == "k") return k;
    if (column == "survivors") return static_cast<double>(survivors);
    throw std::invalid_argument("unknown column '" + std::string(column) + "'");
  }
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_results_csv(std::ostream& out, const EnsembleSummary& summary) {
  for (std::size_t c = 0; c < kResultsColumns.size(); ++c) out << (c ? "," : "") << kResultsColumns[c];
  out << '\n';
  for (const auto& r : summary.rows()) {
    const bool blank = r.empty();
    auto stat = [&](double v) { return blank ? std::string() : format_number(v); };
    out << r.k << ',' << r.survivors << ',' << format_number(r.success_rate) << ',' << stat(r.mean_var) << ','
        << stat(r.se_var) << ',' << stat(r.mean_energy) << ',' << stat(r.se_energy) << ',' << stat(r.mean_h2) << ','
        << stat(r.spread_v) << ',' << format_number(r.ctrl_evos_mean) << ',' << format_number(r.bell_pairs_mean)
        << ',' << format_number(r.cost_per_state) << '\n';
  }
}

inline void write_results_csv(const std::string& path, const EnsembleSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_results_csv(out, summary);
  if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

namespace results_detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double to_double(const std::string& s, std::size_t line) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace results_detail

inline std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = results_detail::split(line);
  if (header.size() != kResultsColumns.size()) throw std::runtime_error("results: unexpected header");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != kResultsColumns[c]) throw std::runtime_error("results: unexpected column '" + header[c] + "'");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = results_detail::split(line);
    if (cells.size() != kResultsColumns.size()) {
      throw std::runtime_error("results line " + std::to_string(lineno) + ": expected 12 cells");
    }
    ResultRow r;
    r.k = static_cast<int>(results_detail::to_double(cells[0], lineno));
    r.survivors = static_cast<std::uint64_t>(std::stoull(cells[1]));
    for (std::size_t c = 2; c < cells.size(); ++c) {
      if (!cells[c].empty()) r.values[c - 2] = results_detail::to_double(cells[c], lineno);
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return parse_results_csv(in);
}

/// Column as a k-indexed series; blank cells become NaN.
inline std::vector<double> column_series(const std::vector<ResultRow>& rows, std::string_view column) {
  std::vector<double> out;
  for (const auto& r : rows) {
    const auto v = r.get(column);
    out.push_back(v ? *v : NAN);
  }
  return out;
}

inline Json run_manifest(const ExperimentFile& ex, const EnsembleSummary& summary,
                         const std::vector<std::string>& overrides, double wall_seconds, unsigned threads) {
  return Json{{"version", kVersion},
              {"config", config_echo(ex)},
              {"seed", ex.protocol.seed},
              {"seed_scheme", "trajectory i uses mt19937_64 seeded with splitmix64(seed ^ splitmix64(i + 1))"},
              {"overrides", overrides},
              {"threads", threads},
              {"wall_seconds", wall_seconds},
              {"trials", summary.trials},
              {"completed", summary.completed},
              {"rejected", summary.rejected},
              {"aborted", summary.aborted},
              {"restarts", summary.restarts},
              {"attempted_iterations", summary.attempted_iterations},
              {"controlled_evolutions", summary.controlled_evolutions},
              {"bell_pairs", summary.bell_pairs},
              {"warnings", summary.warnings}};
}

}  // namespace distfilter
