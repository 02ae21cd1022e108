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

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "distfilter/analytics.hpp"
#include "distfilter/rng.hpp"
#include "distfilter/stats.hpp"
#include "distfilter/trajectory.hpp"

namespace distfilter {

// variable slots in the per-k accumulators
inline constexpr std::size_t kVar = 0;
inline constexpr std::size_t kEnergy = 1;
inline constexpr std::size_t kH2 = 2;

/// One row of the per-iteration table.
struct IterationStats {
  int k = 0;
  std::uint64_t survivors = 0;
  double success_rate = 0.0;
  double mean_var = NAN, sd_var = NAN, se_var = NAN;
  double mean_energy = NAN, sd_energy = NAN, se_energy = NAN;
  double mean_h2 = NAN;
  double spread_v = NAN, se_spread = NAN;
  double ctrl_evos_mean = NAN;
  double bell_pairs_mean = NAN;
  double cost_per_state = NAN;

  bool empty() const { return survivors == 0; }
};

/// Mergeable ensemble accumulators. Statistics at k cover trajectories that
/// hold observables at k: survivors through k in survival mode, completed
/// runs in restart mode.
struct EnsembleSummary {
  int devices = 1;
  int iterations = 0;
  RestartMode mode = RestartMode::survival;
  std::uint64_t trials = 0;
  std::vector<Comoments<3>> moments;        // index k
  std::vector<std::uint64_t> evolutions_sum;  // restart mode, completed runs, index k
  std::vector<std::uint64_t> bell_pairs_sum;
  std::uint64_t completed = 0;
  std::uint64_t rejected = 0;
  std::uint64_t aborted = 0;
  std::uint64_t restarts = 0;
  std::uint64_t attempted_iterations = 0;
  std::uint64_t controlled_evolutions = 0;
  std::uint64_t bell_pairs = 0;
  std::vector<std::string> warnings;

  static EnsembleSummary empty_for(const ProtocolConfig& cfg) {
    EnsembleSummary s;
    s.devices = cfg.devices;
    s.iterations = cfg.iterations;
    s.mode = cfg.restart_mode;
    const auto rows = static_cast<std::size_t>(cfg.iterations) + 1;
    s.moments.resize(rows);
    s.evolutions_sum.assign(rows, 0);
    s.bell_pairs_sum.assign(rows, 0);
    return s;
  }

  void add(const TrajectoryRecord& rec) {
    ++trials;
    restarts += rec.restarts;
    controlled_evolutions += rec.controlled_evolutions;
    bell_pairs += rec.bell_pairs;
    attempted_iterations += rec.controlled_evolutions / static_cast<std::uint64_t>(devices);
    switch (rec.status) {
      case TerminalStatus::completed: ++completed; break;
      case TerminalStatus::rejected: ++rejected; break;
      case TerminalStatus::aborted_max_restarts: ++aborted; break;
    }
    if (mode == RestartMode::restart && rec.status != TerminalStatus::completed) return;
    for (std::size_t k = 0; k < rec.observables.size(); ++k) {
      const auto& o = rec.observables[k];
      moments[k].add({o.variance, o.energy, o.second_moment});
    }
    if (mode == RestartMode::restart) {
      for (std::size_t k = 0; k < rec.evolutions_at.size(); ++k) {
        evolutions_sum[k] += rec.evolutions_at[k];
        bell_pairs_sum[k] += rec.bell_pairs_at[k];
      }
    }
  }

  std::uint64_t survivors(int k) const { return moments.at(static_cast<std::size_t>(k)).n; }

  std::vector<double> survival_curve() const {
    std::vector<double> s(moments.size());
    for (std::size_t k = 0; k < moments.size(); ++k) {
      s[k] = trials ? static_cast<double>(moments[k].n) / static_cast<double>(trials) : 0.0;
    }
    return s;
  }

  std::vector<IterationStats> rows() const {
    std::vector<IterationStats> out(moments.size());
    const auto curve = survival_curve();
    for (std::size_t k = 0; k < moments.size(); ++k) {
      IterationStats& r = out[k];
      const auto& m = moments[k];
      r.k = static_cast<int>(k);
      r.survivors = m.n;
      r.success_rate = curve[k];
      if (mode == RestartMode::survival) {
        const auto cost = expected_cost(curve, devices, static_cast<int>(k));
        r.ctrl_evos_mean = cost.controlled_evolutions;
        r.bell_pairs_mean = cost.bell_pairs;
        r.cost_per_state = cost.evolutions_per_state;
      } else if (m.n > 0) {
        const double n = static_cast<double>(m.n);
        r.ctrl_evos_mean = static_cast<double>(evolutions_sum[k]) / n;
        r.bell_pairs_mean = static_cast<double>(bell_pairs_sum[k]) / n;
        r.cost_per_state = r.ctrl_evos_mean / devices;
      }
      if (m.n == 0) continue;
      r.mean_var = m.mean[kVar];
      r.mean_energy = m.mean[kEnergy];
      r.mean_h2 = m.mean[kH2];
      r.sd_var = m.sd(kVar);
      r.se_var = m.se(kVar);
      r.sd_energy = m.sd(kEnergy);
      r.se_energy = m.se(kEnergy);
      r.spread_v = r.mean_h2 - r.mean_energy * r.mean_energy;
      if (m.n >= 2) {
        // delta method for mean(h2) - mean(E)^2
        const double e = r.mean_energy;
        const double var = m.covariance(kH2, kH2) - 4.0 * e * m.covariance(kH2, kEnergy) +
                           4.0 * e * e * m.covariance(kEnergy, kEnergy);
        r.se_spread = std::sqrt(std::max(0.0, var) / static_cast<double>(m.n));
      }
    }
    return out;
  }

  /// First k with no trajectories left, or K + 1.
  int first_empty() const {
    for (std::size_t k = 0; k < moments.size(); ++k) {
      if (moments[k].n == 0) return static_cast<int>(k);
    }
    return static_cast<int>(moments.size());
  }
};

inline EnsembleSummary merge_summaries(const EnsembleSummary& a, const EnsembleSummary& b) {
  if (a.devices != b.devices || a.iterations != b.iterations || a.mode != b.mode) {
    throw std::invalid_argument("merge_summaries: summaries come from different configurations");
  }
  EnsembleSummary out = a;
  out.trials += b.trials;
  for (std::size_t k = 0; k < out.moments.size(); ++k) {
    out.moments[k].merge(b.moments[k]);
    out.evolutions_sum[k] += b.evolutions_sum[k];
    out.bell_pairs_sum[k] += b.bell_pairs_sum[k];
  }
  out.completed += b.completed;
  out.rejected += b.rejected;
  out.aborted += b.aborted;
  out.restarts += b.restarts;
  out.attempted_iterations += b.attempted_iterations;
  out.controlled_evolutions += b.controlled_evolutions;
  out.bell_pairs += b.bell_pairs;
  for (const auto& w : b.warnings) {
    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
  }
  return out;
}

/// Runs trajectories [first, last) sequentially in index order.
inline EnsembleSummary run_range(const Protocol& protocol, std::uint64_t first, std::uint64_t last) {
  EnsembleSummary s = EnsembleSummary::empty_for(protocol.config);
  for (std::uint64_t i = first; i < last; ++i) {
    Rng rng = trajectory_rng(protocol.config.seed, i);
    s.add(run_trajectory(protocol, rng));
  }
  return s;
}

/// Trials are cut into `config.shards` contiguous shards; shards run on up to
/// `threads` workers and are merged in shard order, so the result depends on
/// the seed, trial count and shard count only.
inline EnsembleSummary run_ensemble(const Protocol& protocol, unsigned threads = 0) {
  const ProtocolConfig& cfg = protocol.config;
  const std::uint64_t trials = cfg.trials;
  const std::uint64_t shards = std::min<std::uint64_t>(cfg.shards, trials);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, shards));

  std::vector<EnsembleSummary> parts(shards);
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned w) {
    try {
      for (std::uint64_t sh = next++; sh < shards; sh = next++) {
        const std::uint64_t lo = trials * sh / shards;
        const std::uint64_t hi = trials * (sh + 1) / shards;
        parts[sh] = run_range(protocol, lo, hi);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = shards;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleSummary total = EnsembleSummary::empty_for(cfg);
  for (const auto& p : parts) total = merge_summaries(total, p);
  total.warnings = protocol.warnings;
  const int empty_at = total.first_empty();
  if (empty_at <= cfg.iterations) {
    total.warnings.push_back("no surviving trajectories from k=" + std::to_string(empty_at) +
                             "; later rows carry blank statistics");
  }
  if (total.aborted > 0) {
    total.warnings.push_back(std::to_string(total.aborted) + " trajectories hit the restart cap of " +
                             std::to_string(cfg.max_restarts));
  }
  return total;
}

inline EnsembleSummary run_ensemble(const ProtocolConfig& config, unsigned threads = 0) {
  const Protocol protocol(config);
  return run_ensemble(protocol, threads);
}

}  // namespace distfilter
