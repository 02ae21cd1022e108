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

#include <cmath>

#include <gtest/gtest.h>

#include "distfilter/ensemble.hpp"

namespace distfilter {
namespace {

ProtocolConfig small(PostselectionPolicy policy, std::size_t trials, std::size_t shards) {
  ProtocolConfig cfg;
  cfg.hamiltonian = {3, 1, 1, 1, 0};
  cfg.devices = 2;
  cfg.policy = policy;
  cfg.iterations = 12;
  cfg.trials = trials;
  cfg.shards = shards;
  cfg.seed = 99;
  return cfg;
}

TEST(Comoments, MatchTwoPassOracle) {
  Rng rng(1);
  std::normal_distribution<double> g;
  std::vector<std::array<double, 3>> xs(500);
  Comoments<3> m;
  for (auto& x : xs) {
    x = {g(rng), 3.0 + 2.0 * g(rng), 1e6 + g(rng)};
    m.add(x);
  }
  std::array<double, 3> mean{};
  for (const auto& x : xs)
    for (std::size_t a = 0; a < 3; ++a) mean[a] += x[a] / 500.0;
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_NEAR(m.mean[a], mean[a], 1e-9 * (1 + std::abs(mean[a])));
    for (std::size_t b = 0; b < 3; ++b) {
      double c = 0.0;
      for (const auto& x : xs) c += (x[a] - mean[a]) * (x[b] - mean[b]);
      EXPECT_NEAR(m.covariance(a, b), c / 499.0, 1e-9);
    }
  }
  EXPECT_NEAR(m.se(1), m.sd(1) / std::sqrt(500.0), 1e-15);
}

TEST(Comoments, MergeIsOrderIndependent) {
  Rng rng(2);
  std::normal_distribution<double> g;
  Comoments<3> a, b, all;
  for (int i = 0; i < 300; ++i) {
    const std::array<double, 3> x = {g(rng), g(rng) * 4.0, g(rng) + 10.0};
    (i < 120 ? a : b).add(x);
    all.add(x);
  }
  Comoments<3> ab = a, ba = b, with_empty = a;
  ab.merge(b);
  ba.merge(a);
  with_empty.merge(Comoments<3>{});
  EXPECT_EQ(ab.n, ba.n);
  EXPECT_EQ(with_empty.n, a.n);
  EXPECT_EQ(with_empty.mean, a.mean);
  for (std::size_t x = 0; x < 3; ++x) {
    EXPECT_NEAR(ab.mean[x], ba.mean[x], 1e-12);
    EXPECT_NEAR(ab.mean[x], all.mean[x], 1e-12);
    for (std::size_t y = 0; y < 3; ++y) {
      EXPECT_NEAR(ab.covariance(x, y), ba.covariance(x, y), 1e-12);
      EXPECT_NEAR(ab.covariance(x, y), all.covariance(x, y), 1e-10);
    }
  }
  Comoments<3> lone;
  lone.add({1, 2, 3});
  EXPECT_TRUE(std::isnan(lone.covariance(0, 0)));
  EXPECT_TRUE(std::isnan(lone.se(0)));
}

TEST(Summary, MergeWithEmptyAndCommutes) {
  const auto cfg = small(PostselectionPolicy::weak, 400, 1);
  const Protocol protocol(cfg);
  const auto a = run_range(protocol, 0, 150);
  const auto b = run_range(protocol, 150, 400);
  const auto empty = EnsembleSummary::empty_for(cfg);
  const auto ae = merge_summaries(a, empty);
  EXPECT_EQ(ae.trials, a.trials);
  for (int k = 0; k <= cfg.iterations; ++k) EXPECT_EQ(ae.survivors(k), a.survivors(k));
  const auto ab = merge_summaries(a, b), ba = merge_summaries(b, a);
  EXPECT_EQ(ab.trials, ba.trials);
  EXPECT_EQ(ab.controlled_evolutions, ba.controlled_evolutions);
  for (int k = 0; k <= cfg.iterations; ++k) {
    EXPECT_EQ(ab.survivors(k), ba.survivors(k));
    const auto& ma = ab.moments[static_cast<std::size_t>(k)];
    const auto& mb = ba.moments[static_cast<std::size_t>(k)];
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(ma.mean[x], mb.mean[x], 1e-12);
  }
  auto other = small(PostselectionPolicy::weak, 10, 1);
  other.iterations = 3;
  EXPECT_THROW(merge_summaries(a, EnsembleSummary::empty_for(other)), std::invalid_argument);
}

TEST(Sharding, EightShardsMatchUnshardedRun) {
  const auto one = run_ensemble(small(PostselectionPolicy::weak, 10000, 1), 1);
  const auto eight = run_ensemble(small(PostselectionPolicy::weak, 10000, 8), 1);
  for (int k = 0; k <= 12; ++k) {
    EXPECT_EQ(one.survivors(k), eight.survivors(k));
    const auto& a = one.moments[static_cast<std::size_t>(k)];
    const auto& b = eight.moments[static_cast<std::size_t>(k)];
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(a.mean[x], b.mean[x], 1e-10 * (1 + std::abs(a.mean[x])));
  }
  EXPECT_EQ(one.controlled_evolutions, eight.controlled_evolutions);
}

TEST(Sharding, ThreadCountDoesNotChangeResults) {
  const auto cfg = small(PostselectionPolicy::strong, 3000, 16);
  const auto a = run_ensemble(cfg, 1);
  const auto b = run_ensemble(cfg, 4);
  for (int k = 0; k <= 12; ++k) {
    EXPECT_EQ(a.survivors(k), b.survivors(k));
    EXPECT_EQ(a.moments[static_cast<std::size_t>(k)].mean, b.moments[static_cast<std::size_t>(k)].mean);
    EXPECT_EQ(a.moments[static_cast<std::size_t>(k)].co, b.moments[static_cast<std::size_t>(k)].co);
  }
}

TEST(Ensemble, EigenstateHasZeroVarianceEverywhere) {
  for (auto policy : {PostselectionPolicy::none, PostselectionPolicy::weak, PostselectionPolicy::strong}) {
    auto cfg = small(policy, 4000, 8);
    cfg.initial = InitialStateSpec::eigenstate(3);
    const auto sum = run_ensemble(cfg, 1);
    const auto rows = sum.rows();
    for (const auto& r : rows) {
      ASSERT_FALSE(r.empty());
      EXPECT_EQ(r.mean_var, 0.0);
      EXPECT_NEAR(r.spread_v, 0.0, 1e-9);
      if (policy == PostselectionPolicy::strong) {
        const double expect = std::pow(0.75, r.k);
        EXPECT_NEAR(r.success_rate, expect, 4 * std::sqrt(expect * (1 - expect) / 4000) + 1e-12);
      } else {
        EXPECT_EQ(r.success_rate, 1.0);
      }
    }
  }
}

TEST(Ensemble, SingleDeviceConservesEnergy) {
  ProtocolConfig cfg;
  cfg.hamiltonian = {4, 1, 1, 1, 0};
  cfg.devices = 1;
  cfg.policy = PostselectionPolicy::none;
  cfg.iterations = 25;
  cfg.trials = 10000;
  const auto rows = run_ensemble(cfg, 0).rows();
  const double e0 = rows[0].mean_energy;
  for (const auto& r : rows) {
    EXPECT_EQ(r.survivors, 10000u);
    if (r.k > 0) {
      EXPECT_NEAR(r.mean_energy, e0, 4 * r.se_energy);
    }
  }
}

TEST(Ensemble, SpreadIsVarianceOfMixture) {
  const auto sum = run_ensemble(small(PostselectionPolicy::weak, 2000, 4), 1);
  const auto rows = sum.rows();
  for (const auto& r : rows) {
    // law of total variance: spread = E[var] + Var[E]
    const auto& m = sum.moments[static_cast<std::size_t>(r.k)];
    const double n = static_cast<double>(m.n);
    const double var_of_energy = m.covariance(kEnergy, kEnergy) * (n - 1) / n;
    EXPECT_NEAR(r.spread_v, r.mean_var + var_of_energy, 1e-9);
    EXPECT_GE(r.se_spread, 0.0);
  }
  EXPECT_NEAR(rows[0].spread_v, rows[0].mean_var, 1e-12);
}

TEST(Ensemble, EmptyRowsAfterExtinction) {
  auto cfg = small(PostselectionPolicy::strong, 20, 2);
  cfg.hamiltonian = {4, 1, 1, 1, 0};
  cfg.iterations = 40;
  const auto sum = run_ensemble(cfg, 1);
  const int first = sum.first_empty();
  ASSERT_LE(first, 40);
  const auto rows = sum.rows();
  for (int k = first; k <= 40; ++k) {
    EXPECT_TRUE(rows[static_cast<std::size_t>(k)].empty());
    EXPECT_TRUE(std::isnan(rows[static_cast<std::size_t>(k)].mean_var));
  }
  bool warned = false;
  for (const auto& w : sum.warnings) warned |= w.find("no surviving") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(Ensemble, RestartModeCountsCompletedRuns) {
  auto cfg = small(PostselectionPolicy::strong, 300, 4);
  cfg.iterations = 5;
  cfg.restart_mode = RestartMode::restart;
  const auto sum = run_ensemble(cfg, 1);
  EXPECT_EQ(sum.completed, 300u);
  const auto rows = sum.rows();
  for (const auto& r : rows) EXPECT_EQ(r.survivors, 300u);
  EXPECT_EQ(rows[0].ctrl_evos_mean, 0.0);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_GT(rows[static_cast<std::size_t>(k)].ctrl_evos_mean, rows[static_cast<std::size_t>(k) - 1].ctrl_evos_mean);
    EXPECT_DOUBLE_EQ(rows[static_cast<std::size_t>(k)].bell_pairs_mean * 2, rows[static_cast<std::size_t>(k)].ctrl_evos_mean);
  }
  EXPECT_DOUBLE_EQ(rows[5].cost_per_state, rows[5].ctrl_evos_mean / 2);
}

TEST(Ensemble, RestartCostMatchesGeometricModel) {
  // restart-mode resources against the closed form applied to the analytic survival law
  ProtocolConfig cfg = small(PostselectionPolicy::strong, 4000, 8);
  cfg.hamiltonian = {2, 1, 1, 1, 0};
  cfg.iterations = 4;
  cfg.restart_mode = RestartMode::restart;
  const Protocol protocol(cfg);
  const auto profile = PopulationProfile::from_amplitudes(protocol.model, protocol.initial);
  std::vector<double> s;
  for (int k = 0; k <= 4; ++k) s.push_back(strong_success_rate(profile, k));
  const auto rows = run_ensemble(protocol, 1).rows();
  const double expect = expected_cost(s, 2, 4).controlled_evolutions;
  EXPECT_NEAR(rows[4].ctrl_evos_mean, expect, 0.05 * expect);
}

}  // namespace
}  // namespace distfilter
