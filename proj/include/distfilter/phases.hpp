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
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "distfilter/rng.hpp"
#include "distfilter/spectral.hpp"

namespace distfilter {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class PhaseMode { iid_uniform, time_window };

/// Evolution-time window [t_min, t_max]. t_min == t_max is accepted and
/// yields a deterministic time (used to pin phases in tests).
struct TimeWindow {
  double t_min = 1.0;
  double t_max = 1001.0;

  void validate() const {
    if (!std::isfinite(t_min) || !std::isfinite(t_max)) throw std::invalid_argument("time window: non-finite bound");
    if (t_min <= 0.0) throw std::invalid_argument("time window: t_min must be positive");
    if (t_max < t_min) throw std::invalid_argument("time window: t_max < t_min");
  }
};

struct PhaseSample {
  std::vector<double> phases;
  PhaseMode mode = PhaseMode::iid_uniform;
  std::optional<double> time;
};

/// Reduces x into [0, 2*pi).
inline double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// phi_j = (-t * lambda_j) mod 2*pi.
inline PhaseSample phases_at_time(std::span<const double> eigenvalues, double t) {
  PhaseSample out;
  out.mode = PhaseMode::time_window;
  out.time = t;
  out.phases.resize(eigenvalues.size());
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) out.phases[j] = wrap_phase(-t * eigenvalues[j]);
  return out;
}

inline PhaseSample sample_phases(const SpectralModel& model, PhaseMode mode, const TimeWindow& window, Rng& rng) {
  if (mode == PhaseMode::time_window) {
    window.validate();
    const double t = window.t_min + (window.t_max - window.t_min) * uniform01(rng);
    return phases_at_time(model.eigenvalues, t);
  }
  PhaseSample out;
  out.mode = PhaseMode::iid_uniform;
  out.phases.resize(model.dim);
  for (auto& phi : out.phases) phi = kTwoPi * uniform01(rng);
  return out;
}

struct UniformityReport {
  std::vector<double> ks_distance;  // per eigenvalue, against Uniform(0, 2*pi)
  double max_ks = 0.0;
  // max over pairs j < j' of |<exp(i(phi_j - phi_j'))>| and |<exp(i(phi_j + phi_j'))>|
  double max_correlation = 0.0;
  double threshold = 0.05;
  bool passes() const { return max_ks < threshold && max_correlation < threshold; }
};

inline double ks_distance_uniform(std::vector<double> unit_samples) {
  std::sort(unit_samples.begin(), unit_samples.end());
  const double n = static_cast<double>(unit_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < unit_samples.size(); ++i) {
    const double x = unit_samples[i];
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

/// Checks how well the sampled phases approximate i.i.d. uniform variables.
inline UniformityReport phase_uniformity_diagnostic(const SpectralModel& model, PhaseMode mode,
                                                    const TimeWindow& window, std::size_t draws, Rng& rng,
                                                    double threshold = 0.05) {
  if (draws == 0) throw std::invalid_argument("phase diagnostic: need at least one draw");
  const std::size_t dim = model.dim;
  std::vector<std::vector<double>> unit(dim, std::vector<double>(draws));
  std::vector<std::complex<double>> rotor(dim * draws);
  for (std::size_t r = 0; r < draws; ++r) {
    const PhaseSample s = sample_phases(model, mode, window, rng);
    for (std::size_t j = 0; j < dim; ++j) {
      unit[j][r] = s.phases[j] / kTwoPi;
      rotor[j * draws + r] = std::polar(1.0, s.phases[j]);
    }
  }
  UniformityReport report;
  report.threshold = threshold;
  report.ks_distance.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    report.ks_distance[j] = ks_distance_uniform(std::move(unit[j]));
    report.max_ks = std::max(report.max_ks, report.ks_distance[j]);
  }
  const double inv = 1.0 / static_cast<double>(draws);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a + 1; b < dim; ++b) {
      std::complex<double> diff = 0.0;
      std::complex<double> sum = 0.0;
      for (std::size_t r = 0; r < draws; ++r) {
        diff += rotor[a * draws + r] * std::conj(rotor[b * draws + r]);
        sum += rotor[a * draws + r] * rotor[b * draws + r];
      }
      report.max_correlation = std::max({report.max_correlation, std::abs(diff) * inv, std::abs(sum) * inv});
    }
  }
  return report;
}

}  // namespace distfilter
