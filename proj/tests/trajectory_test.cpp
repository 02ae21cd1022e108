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

#include "distfilter/trajectory.hpp"

namespace distfilter {
namespace {

ProtocolConfig base(int n, int s, PostselectionPolicy policy, int K) {
  ProtocolConfig cfg;
  cfg.hamiltonian = {n, 1.0, 1.0, 1.0, 0.0};
  cfg.devices = s;
  cfg.policy = policy;
  cfg.iterations = K;
  return cfg;
}

TEST(Trajectory, ZeroIterationsRecordsInitialObservablesOnly) {
  auto cfg = base(3, 2, PostselectionPolicy::weak, 0);
  Rng rng(1);
  const Protocol protocol(cfg);
  const auto rec = run_trajectory(protocol, rng);
  ASSERT_EQ(rec.observables.size(), 1u);
  EXPECT_EQ(rec.controlled_evolutions, 0u);
  EXPECT_EQ(rec.bell_pairs, 0u);
  EXPECT_EQ(rec.status, TerminalStatus::completed);
  double e = 0.0;
  for (std::size_t j = 0; j < protocol.model.dim; ++j) e += std::norm(protocol.initial[j]) * protocol.model.eigenvalues[j];
  EXPECT_NEAR(rec.observables[0].energy, e, 1e-12);
}

TEST(Trajectory, NoPostselectionCostsAreExact) {
  for (int K : {1, 7, 10}) {
    auto cfg = base(2, 2, PostselectionPolicy::none, K);
    Rng rng(static_cast<std::uint64_t>(K));
    const auto rec = run_trajectory(cfg, rng);
    EXPECT_EQ(rec.status, TerminalStatus::completed);
    EXPECT_EQ(rec.reached, K);
    EXPECT_EQ(rec.controlled_evolutions, 2u * static_cast<std::uint64_t>(K));
    EXPECT_EQ(rec.bell_pairs, static_cast<std::uint64_t>(K));
    EXPECT_EQ(rec.observables.size(), static_cast<std::size_t>(K) + 1);
  }
}

TEST(Trajectory, ThreeDeviceCostPerAttempt) {
  auto cfg = base(2, 3, PostselectionPolicy::none, 5);
  Rng rng(2);
  const auto rec = run_trajectory(cfg, rng);
  EXPECT_EQ(rec.controlled_evolutions, 15u);
  EXPECT_EQ(rec.bell_pairs, 10u);
}

TEST(Trajectory, EigenstateUnderWeakNeverRestarts) {
  for (int s : {2, 3}) {
    auto cfg = base(3, s, PostselectionPolicy::weak, 20);
    cfg.initial = InitialStateSpec::eigenstate(2);
    cfg.restart_mode = RestartMode::restart;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const auto rec = run_trajectory(cfg, rng);
      EXPECT_EQ(rec.restarts, 0u);
      EXPECT_EQ(rec.status, TerminalStatus::completed);
      for (const auto& o : rec.observables) EXPECT_EQ(o.variance, 0.0);
    }
  }
}

TEST(Trajectory, RestartModeEventuallyCompletes) {
  auto cfg = base(2, 2, PostselectionPolicy::strong, 6);
  cfg.restart_mode = RestartMode::restart;
  Rng rng(3);
  const auto rec = run_trajectory(cfg, rng);
  EXPECT_EQ(rec.status, TerminalStatus::completed);
  EXPECT_EQ(rec.reached, 6);
  ASSERT_EQ(rec.outcomes.size(), 6u);
  for (const auto& o : rec.outcomes) EXPECT_TRUE(o.accepted);
  EXPECT_EQ(rec.controlled_evolutions % 2, 0u);
  EXPECT_GE(rec.controlled_evolutions, 12u);
  EXPECT_EQ(rec.bell_pairs * 2, rec.controlled_evolutions);
  EXPECT_EQ(rec.evolutions_at.size(), 7u);
  for (std::size_t k = 1; k < rec.evolutions_at.size(); ++k) EXPECT_GT(rec.evolutions_at[k], rec.evolutions_at[k - 1]);
  EXPECT_EQ(rec.evolutions_at.back(), rec.controlled_evolutions);
}

TEST(Trajectory, RestartCapAborts) {
  auto cfg = base(3, 3, PostselectionPolicy::strong, 25);
  cfg.restart_mode = RestartMode::restart;
  cfg.max_restarts = 3;
  Rng rng(4);
  const auto rec = run_trajectory(cfg, rng);
  EXPECT_EQ(rec.status, TerminalStatus::aborted_max_restarts);
  EXPECT_EQ(rec.restarts, 3u);
  EXPECT_LT(rec.reached, 25);
}

TEST(Trajectory, SurvivalModeStopsAtFirstRejection) {
  auto cfg = base(3, 2, PostselectionPolicy::strong, 25);
  cfg.restart_mode = RestartMode::survival;
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto rec = run_trajectory(cfg, rng);
    if (rec.status == TerminalStatus::rejected) {
      ++rejected;
      ASSERT_TRUE(rec.first_failure.has_value());
      EXPECT_EQ(*rec.first_failure, rec.reached + 1);
      EXPECT_FALSE(rec.outcomes.back().accepted);
      EXPECT_EQ(rec.observables.size(), static_cast<std::size_t>(rec.reached) + 1);
      EXPECT_EQ(rec.controlled_evolutions, 2u * static_cast<std::uint64_t>(rec.reached + 1));
    } else {
      EXPECT_FALSE(rec.first_failure.has_value());
    }
  }
  EXPECT_GT(rejected, 40);
}

TEST(Trajectory, SameSeedIsReproducible) {
  auto cfg = base(3, 2, PostselectionPolicy::weak, 10);
  Rng a = trajectory_rng(7, 3), b = trajectory_rng(7, 3);
  const auto ra = run_trajectory(cfg, a);
  const auto rb = run_trajectory(cfg, b);
  ASSERT_EQ(ra.outcomes.size(), rb.outcomes.size());
  for (std::size_t i = 0; i < ra.outcomes.size(); ++i) EXPECT_EQ(ra.outcomes[i].outcome, rb.outcomes[i].outcome);
  EXPECT_EQ(ra.observables.back().energy, rb.observables.back().energy);
}

TEST(Trajectory, DegenerateSpectrumWarns) {
  ProtocolConfig cfg;
  cfg.hamiltonian_matrix = DenseMatrix::Identity(4, 4);
  cfg.devices = 2;
  const Protocol protocol(cfg);
  ASSERT_EQ(protocol.warnings.size(), 1u);
  EXPECT_NE(protocol.warnings[0].find("degenerate"), std::string::npos);
  Rng rng(1);
  EXPECT_NO_THROW(run_trajectory(protocol, rng));
}

TEST(Trajectory, GuardsRejectBeforeRunning) {
  auto cfg = base(6, 3, PostselectionPolicy::weak, 5);
  EXPECT_THROW(Protocol{cfg}, std::invalid_argument);
  cfg = base(2, 2, PostselectionPolicy::weak, -1);
  EXPECT_THROW(Protocol{cfg}, std::invalid_argument);
  cfg = base(2, 7, PostselectionPolicy::weak, 1);
  EXPECT_THROW(Protocol{cfg}, std::invalid_argument);
}

TEST(DeviceEnsemble, ProductAndJointRepresentationsAgree) {
  for (int s : {2, 3}) {
    auto cfg = base(2, s, PostselectionPolicy::strong, 10);
    const Protocol protocol(cfg);
    int matched_steps = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      DeviceEnsemble product(protocol, true), joint(protocol, false);
      ASSERT_EQ(product.representation(), DeviceEnsemble::Representation::product);
      ASSERT_EQ(joint.representation(), DeviceEnsemble::Representation::joint);
      Rng r1(seed), r2(seed);
      for (int k = 0; k < 10; ++k) {
        const auto a = product.step(r1);
        const auto b = joint.step(r2);
        ASSERT_EQ(a.outcome, b.outcome);
        EXPECT_NEAR(a.probability, b.probability, 1e-12);
        if (!a.accepted) break;
        ++matched_steps;
        EXPECT_NEAR(product.observables().energy, joint.observables().energy, 1e-10);
        EXPECT_NEAR(product.observables().variance, joint.observables().variance, 1e-10);
      }
    }
    EXPECT_GT(matched_steps, 20);
  }
}

TEST(DeviceEnsemble, RejectedProductBranchNeedsReset) {
  auto cfg = base(2, 2, PostselectionPolicy::strong, 10);
  const Protocol protocol(cfg);
  DeviceEnsemble dev(protocol);
  Rng rng(0);
  bool rejected = false;
  for (int i = 0; i < 100 && !rejected; ++i) {
    if (!dev.step(rng).accepted) rejected = true;
  }
  ASSERT_TRUE(rejected);
  EXPECT_THROW(dev.observables(), std::logic_error);
  dev.reset();
  EXPECT_NO_THROW(dev.observables());
}

TEST(Modes, ParseRoundTrip) {
  EXPECT_EQ(parse_restart_mode(to_string(RestartMode::restart)), RestartMode::restart);
  EXPECT_EQ(parse_phase_mode(to_string(PhaseMode::time_window)), PhaseMode::time_window);
  EXPECT_THROW(parse_restart_mode("retry"), std::invalid_argument);
  EXPECT_THROW(parse_phase_mode("random"), std::invalid_argument);
}

}  // namespace
}  // namespace distfilter
