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

// distfilter command-line front end: simulate, analytic, fit, validate.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distfilter/analytics.hpp"
#include "distfilter/config.hpp"
#include "distfilter/ensemble.hpp"
#include "distfilter/fit.hpp"
#include "distfilter/results_io.hpp"
#include "distfilter/validation.hpp"

namespace {

using namespace distfilter;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_json(const Json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << doc.dump(2) << '\n';
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& output,
                 const std::string& manifest_path, unsigned threads) {
  ExperimentFile ex = load_experiment(config_path, overrides);
  if (!output.empty()) ex.output_path = output;
  const Protocol protocol(ex.protocol);
  for (const auto& w : protocol.warnings) std::cerr << "warning: " << w << '\n';
  if (!std::ofstream(ex.output_path)) throw std::runtime_error(ex.output_path + ": cannot open for writing");

  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleSummary summary = run_ensemble(protocol, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_results_csv(ex.output_path, summary);
  const std::string mpath = manifest_path.empty() ? ex.output_path + ".manifest.json" : manifest_path;
  const unsigned used = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  write_json(run_manifest(ex, summary, overrides, wall, used), mpath);
  for (const auto& w : summary.warnings) {
    if (std::find(protocol.warnings.begin(), protocol.warnings.end(), w) == protocol.warnings.end()) {
      std::cerr << "warning: " << w << '\n';
    }
  }
  std::cerr << "wrote " << ex.output_path << " and " << mpath << " (" << summary.trials << " trials, " << wall
            << " s)\n";
  return kExitOk;
}

Json analytic_report(const ExperimentFile& ex) {
  const Protocol protocol(ex.protocol);
  const ProtocolConfig& cfg = protocol.config;
  const PopulationProfile profile = PopulationProfile::from_amplitudes(protocol.model, protocol.initial);
  const int K = cfg.iterations;

  Json weak = Json::array(), strong = Json::array();
  std::vector<double> weak_curve, strong_curve;
  Json weak_energy = Json::array(), strong_energy = Json::array();
  Json weak_spread = Json::array(), strong_spread = Json::array();
  for (int k = 0; k <= K; ++k) {
    weak_curve.push_back(weak_success_rate(profile, k));
    strong_curve.push_back(strong_success_rate(profile, k));
    weak.push_back(weak_curve.back());
    strong.push_back(strong_curve.back());
    weak_energy.push_back(weak_energy_approx(profile, k));
    strong_energy.push_back(strong_energy_approx(profile, k));
    weak_spread.push_back(spread_approx_weak(profile, k));
    strong_spread.push_back(spread_approx_strong(profile, k));
  }
  Json floors = Json::object();
  for (int s = 2; s <= kMaxDevices; ++s) floors[std::to_string(s)] = multi_weak_floor(profile, s);

  auto cost_json = [&](const std::vector<double>& curve) {
    Json rows = Json::array();
    for (const auto& c : expected_cost_curve(curve, cfg.devices)) {
      rows.push_back({{"controlled_evolutions", number_or_null(c.controlled_evolutions)},
                      {"bell_pairs", number_or_null(c.bell_pairs)},
                      {"evolutions_per_state", number_or_null(c.evolutions_per_state)},
                      {"bell_pairs_per_state", number_or_null(c.bell_pairs_per_state)}});
    }
    return rows;
  };

  Json gaussian = nullptr;
  try {
    const GaussianSpec g = fit_gaussian(profile);
    GaussianSpec unit = g;
    unit.dimension = 1.0;
    Json energy = Json::array(), spread = Json::array();
    for (int k = 0; k <= K; ++k) {
      energy.push_back(number_or_null(gaussian_energy(g, k)));
      spread.push_back(number_or_null(gaussian_spread(g, k)));
    }
    gaussian = {{"mu", g.mu},
                {"xi2", g.xi2},
                {"sigma2", g.sigma2},
                {"dimension", g.dimension},
                {"normalization", gaussian_normalization(g)},
                {"sum_c4_continuum", gaussian_c4(unit)},
                {"sum_c4_per_dimension", gaussian_c4(g)},
                {"energy", energy},
                {"spread", spread},
                {"spread_drop", gaussian_spread_drop(g)},
                {"bias", gaussian_bias(g)},
                {"bias_bound", gaussian_bias_bound() * std::abs(g.mu)}};
  } catch (const std::invalid_argument& e) {
    gaussian = {{"error", e.what()}};
  }

  return Json{{"config", config_echo(ex)},
              {"eigenvalues", profile.eigenvalues},
              {"populations", profile.populations},
              {"initial_energy", initial_energy(profile)},
              {"initial_spread", initial_spread(profile)},
              {"sum_c4", sum_c4(profile)},
              {"energy_limit", energy_limit(profile)},
              {"spread_limit", spread_limit(profile)},
              {"weak_success_rate", weak},
              {"strong_success_rate", strong},
              {"multi_weak_floor", floors},
              {"weak_energy_approx", weak_energy},
              {"strong_energy_approx", strong_energy},
              {"strong_energy_approx_status", "conjectured approximation"},
              {"weak_spread_approx", weak_spread},
              {"strong_spread_approx", strong_spread},
              {"strong_spread_approx_status", "conjectured approximation"},
              {"bell_pairs_per_iteration", bell_pairs_per_iteration(cfg.devices)},
              {"expected_cost_weak", cost_json(weak_curve)},
              {"expected_cost_strong", cost_json(strong_curve)},
              {"gaussian", gaussian},
              {"warnings", protocol.warnings}};
}

int cmd_analytic(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& output) {
  const ExperimentFile ex = load_experiment(config_path, overrides);
  write_json(analytic_report(ex), output);
  return kExitOk;
}

int cmd_fit(const std::string& csv_path, const std::string& column, int k_min, int k_max, const std::string& output) {
  const auto rows = read_results_csv(csv_path);
  const auto series = column_series(rows, column);
  const DecayFit fit = fit_decay(series, k_min, k_max);
  write_json(Json{{"csv", csv_path},
                  {"column", column},
                  {"k_min", k_min},
                  {"k_max", k_max},
                  {"eta", fit.eta},
                  {"intercept", fit.intercept},
                  {"residual", fit.residual},
                  {"points", fit.points}},
             output);
  return kExitOk;
}

int cmd_validate(const std::string& level, unsigned threads, double theta_same, const std::string& output) {
  ValidationOptions opt;
  opt.threads = threads;
  opt.theta.same = theta_same;
  const auto print = [](const CheckResult& r) {
    std::cout << format_check_line(r) << '\n';
    for (const auto& d : r.details) std::cout << "      " << d << '\n';
    std::cout.flush();
  };
  std::vector<CheckResult> results;
  if (level == "fast") {
    results = run_fast_checks(opt);
    for (const auto& r : results) print(r);
  } else {
    results = run_acceptance(opt, print);
  }
  int failed = 0;
  Json table = Json::array();
  for (const auto& r : results) {
    failed += !r.passed;
    table.push_back({{"id", r.id},
                     {"name", r.name},
                     {"passed", r.passed},
                     {"measured", r.measured},
                     {"target", r.target},
                     {"seconds", r.seconds},
                     {"details", r.details}});
  }
  std::cout << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  if (!output.empty()) write_json(Json{{"level", level}, {"checks", table}}, output);
  return failed ? kExitValidation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed eigenstate-filtering simulator and analytic calculator"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  std::string config_path, output, manifest;
  std::vector<std::string> overrides;

  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo ensemble and write the results CSV + manifest");
  sim->add_option("config", config_path, "experiment JSON")->required();
  sim->add_option("--set", overrides, "override a config field, e.g. --set protocol.K=12");
  sim->add_option("-o,--output", output, "results CSV (default: run.output_path)");
  sim->add_option("--manifest", manifest, "manifest path (default: <output>.manifest.json)");

  auto* ana = app.add_subcommand("analytic", "closed-form quantities for the configured model as JSON");
  ana->add_option("config", config_path, "experiment JSON")->required();
  ana->add_option("--set", overrides, "override a config field");
  ana->add_option("-o,--output", output, "output JSON (default: stdout)");

  std::string csv_path, column = "mean_var";
  int k_min = 4, k_max = 12;
  auto* fit = app.add_subcommand("fit", "exponential decay fit of a results column");
  fit->add_option("csv", csv_path, "results CSV")->required();
  fit->add_option("--column", column, "column to fit")->capture_default_str();
  fit->add_option("--k-min", k_min, "first k of the window")->capture_default_str();
  fit->add_option("--k-max", k_max, "last k of the window")->capture_default_str();
  fit->add_option("-o,--output", output, "output JSON (default: stdout)");

  std::string level = "fast";
  double theta_same = ThetaConstants{}.same;
  auto* val = app.add_subcommand("validate", "exact invariants (fast) or the full acceptance suite (full)");
  val->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}))->capture_default_str();
  val->add_option("--theta-same", theta_same, "test fixture: override the Theta^{00}_0 prefactor");
  val->add_option("-o,--output", output, "also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(config_path, overrides, output, manifest, threads);
    if (*ana) return cmd_analytic(config_path, overrides, output);
    if (*fit) return cmd_fit(csv_path, column, k_min, k_max, output);
    if (*val) return cmd_validate(level, threads, theta_same, output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
