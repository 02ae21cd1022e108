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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "distfilter/amplitude_state.hpp"
#include "distfilter/analytics.hpp"
#include "distfilter/kernel.hpp"
#include "distfilter/observables.hpp"
#include "distfilter/phases.hpp"
#include "distfilter/postselection.hpp"
#include "distfilter/rng.hpp"
#include "distfilter/spectral.hpp"

namespace distfilter {

/// restart: rejected iterations reset the devices and the run continues until
/// K consecutive acceptances (resources keep accumulating).
/// survival: no restart; the run stops at the first rejection.
enum class RestartMode { restart, survival };

inline std::string_view to_string(RestartMode m) { return m == RestartMode::restart ? "restart" : "survival"; }

inline RestartMode parse_restart_mode(std::string_view s) {
  if (s == "restart") return RestartMode::restart;
  if (s == "survival") return RestartMode::survival;
  throw std::invalid_argument("unknown restart mode '" + std::string(s) + "'");
}

inline std::string_view to_string(PhaseMode m) { return m == PhaseMode::iid_uniform ? "iid-uniform" : "time-window"; }

inline PhaseMode parse_phase_mode(std::string_view s) {
  if (s == "iid-uniform") return PhaseMode::iid_uniform;
  if (s == "time-window") return PhaseMode::time_window;
  throw std::invalid_argument("unknown phase mode '" + std::string(s) + "'");
}

struct ProtocolConfig {
  HamiltonianSpec hamiltonian;
  std::optional<DenseMatrix> hamiltonian_matrix;  // overrides `hamiltonian` when set
  InitialStateSpec initial;
  int devices = 2;
  int iterations = 25;
  PostselectionPolicy policy = PostselectionPolicy::weak;
  PhaseMode phase_mode = PhaseMode::iid_uniform;
  TimeWindow window;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  RestartMode restart_mode = RestartMode::survival;
  std::uint64_t max_restarts = 1000000;
  std::size_t shards = 64;

  int qubits() const {
    if (!hamiltonian_matrix) return hamiltonian.n;
    int n = 0;
    while ((Eigen::Index{1} << n) < hamiltonian_matrix->rows()) ++n;
    return n;
  }

  void validate() const {
    if (!hamiltonian_matrix) hamiltonian.validate();
    check_engine_guard(devices, qubits());
    if (iterations < 0) throw std::invalid_argument("protocol: K must be >= 0");
    if (trials < 1) throw std::invalid_argument("run: trials must be >= 1");
    if (shards < 1) throw std::invalid_argument("run: shards must be >= 1");
    if (phase_mode == PhaseMode::time_window) window.validate();
  }
};

/// A validated config together with its spectrum and initial eigenbasis amplitudes.
struct Protocol {
  ProtocolConfig config;
  SpectralModel model;
  ComplexVector initial;
  std::vector<std::string> warnings;

  static constexpr double kDegenerateGap = 1e-9;

  explicit Protocol(ProtocolConfig cfg) : config(std::move(cfg)) {
    config.validate();
    model = decompose(config.hamiltonian_matrix ? *config.hamiltonian_matrix : build_hamiltonian(config.hamiltonian));
    initial = project_initial(config.initial, model);
    if (model.dim > 1 && model.min_gap() < kDegenerateGap) {
      warnings.push_back("degenerate spectrum: minimum eigenvalue gap " + std::to_string(model.min_gap()) +
                         " < 1e-9; phase randomization cannot separate degenerate eigenstates");
    }
  }
};

enum class TerminalStatus { completed, rejected, aborted_max_restarts };

inline std::string_view to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::completed: return "completed";
    case TerminalStatus::rejected: return "rejected";
    case TerminalStatus::aborted_max_restarts: return "aborted-max-restarts";
  }
  return "?";
}

struct TrajectoryRecord {
  // observables[k] for the recorded (final) attempt, k = 0..reached
  std::vector<Observables> observables;
  // outcomes of the recorded attempt, including a rejected last iteration
  std::vector<IterationOutcome> outcomes;
  int reached = 0;
  std::optional<int> first_failure;
  std::uint64_t restarts = 0;
  std::uint64_t controlled_evolutions = 0;
  std::uint64_t bell_pairs = 0;
  // cumulative resources at the moment k consecutive acceptances were first reached
  std::vector<std::uint64_t> evolutions_at;
  std::vector<std::uint64_t> bell_pairs_at;
  TerminalStatus status = TerminalStatus::completed;
};

/// Owns the evolving state of one trajectory. Under strong postselection every
/// accepted state is s identical copies, so only one device vector is kept and
/// outcome probabilities use the factorized product formula; the joint tensor
/// is used otherwise.
class DeviceEnsemble {
 public:
  enum class Representation { single, product, joint };

  explicit DeviceEnsemble(const Protocol& protocol, bool allow_product = true)
      : protocol_(protocol), kernel_(protocol.config.devices, protocol.model.dim) {
    if (devices() == 1) {
      repr_ = Representation::single;
    } else if (allow_product && protocol.config.policy == PostselectionPolicy::strong) {
      repr_ = Representation::product;
    } else {
      repr_ = Representation::joint;
    }
    reset();
  }

  void reset() {
    if (repr_ == Representation::joint) {
      joint_ = AmplitudeState::copies(protocol_.initial, devices(), protocol_.model.n);
    } else {
      single_ = protocol_.initial;
    }
    valid_ = true;
  }

  int devices() const { return protocol_.config.devices; }
  Representation representation() const { return repr_; }

  Observables observables() const {
    if (!valid_) throw std::logic_error("DeviceEnsemble: state left the product form; reset first");
    if (repr_ == Representation::joint) return reduced_observables(joint_, protocol_.model);
    const auto p = populations(single_);
    return observables_from_populations(p, protocol_.model.eigenvalues);
  }

  /// Joint tensor (expanded from the device vector in the product representation).
  AmplitudeState joint() const {
    if (repr_ == Representation::joint) return joint_;
    return AmplitudeState::copies(single_, devices(), protocol_.model.n);
  }

  /// One filtering iteration with fresh phases; the state is updated to the
  /// post-measurement branch regardless of acceptance. In the product
  /// representation a rejected branch is not kept and the state must be reset.
  IterationOutcome step(Rng& rng) {
    if (!valid_) throw std::logic_error("DeviceEnsemble: state left the product form; reset first");
    const PhaseSample phases = sample_phases(protocol_.model, protocol_.config.phase_mode, protocol_.config.window, rng);
    IterationOutcome out;
    if (repr_ == Representation::single) {
      const auto dist = single_device_probabilities(single_, phases.phases);
      check_mass(dist[0] + dist[1], "single_device_step");
      const auto m = sample_index(dist, uniform01(rng));
      out.outcome = Outcome{1, 0, static_cast<std::uint32_t>(m)};
      out.probability = dist[m];
      apply_single_outcome(single_, phases.phases, static_cast<int>(m), out.probability);
    } else {
      const auto dist = repr_ == Representation::joint ? kernel_.probabilities(joint_, phases.phases)
                                                       : product_state_probabilities(single_, phases.phases, devices());
      double total = 0.0;
      for (double p : dist) total += p;
      check_mass(total, "multi_device_step");
      const auto pick = sample_index(dist, uniform01(rng));
      out.outcome = Outcome::from_index(devices(), pick);
      out.probability = dist[pick];
      if (repr_ == Representation::joint) {
        kernel_.apply(joint_, phases.phases, out.outcome, out.probability);
      } else if (apply_postselection(out.outcome, PostselectionPolicy::strong)) {
        apply_product_outcome(single_, phases.phases, out.outcome);
      } else {
        valid_ = false;
      }
    }
    out.accepted = apply_postselection(out.outcome, protocol_.config.policy);
    return out;
  }

 private:
  const Protocol& protocol_;
  FilterKernel kernel_;
  Representation repr_ = Representation::joint;
  bool valid_ = true;
  ComplexVector single_;
  AmplitudeState joint_;
};

inline TrajectoryRecord run_trajectory(const Protocol& protocol, Rng& rng) {
  const ProtocolConfig& cfg = protocol.config;
  const int s = cfg.devices;
  const int K = cfg.iterations;
  const auto evo_step = static_cast<std::uint64_t>(s);
  const auto bell_step = bell_pairs_per_iteration(s);

  DeviceEnsemble devices(protocol);
  TrajectoryRecord rec;
  rec.observables.reserve(static_cast<std::size_t>(K) + 1);
  rec.observables.push_back(devices.observables());
  rec.evolutions_at.assign(1, 0);
  rec.bell_pairs_at.assign(1, 0);

  int k = 0;
  while (k < K) {
    IterationOutcome out = devices.step(rng);
    out.k = k + 1;
    rec.controlled_evolutions += evo_step;
    rec.bell_pairs += bell_step;
    rec.outcomes.push_back(out);
    if (out.accepted) {
      ++k;
      rec.observables.push_back(devices.observables());
      if (k > rec.reached) {
        rec.reached = k;
        rec.evolutions_at.push_back(rec.controlled_evolutions);
        rec.bell_pairs_at.push_back(rec.bell_pairs);
      }
      continue;
    }
    if (cfg.restart_mode == RestartMode::survival) {
      rec.first_failure = k + 1;
      rec.status = TerminalStatus::rejected;
      return rec;
    }
    if (rec.restarts >= cfg.max_restarts) {
      rec.status = TerminalStatus::aborted_max_restarts;
      return rec;
    }
    ++rec.restarts;
    devices.reset();
    k = 0;
    rec.observables.resize(1);
    rec.outcomes.clear();
  }
  rec.status = TerminalStatus::completed;
  return rec;
}

inline TrajectoryRecord run_trajectory(const ProtocolConfig& config, Rng& rng) {
  const Protocol protocol(config);
  return run_trajectory(protocol, rng);
}

}  // namespace distfilter
