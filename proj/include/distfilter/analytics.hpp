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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "distfilter/spectral.hpp"

namespace distfilter {

/// Eigenvalues together with initial populations |c_j|^2.
struct PopulationProfile {
  std::vector<double> eigenvalues;
  std::vector<double> populations;

  void validate() const {
    if (eigenvalues.size() != populations.size() || eigenvalues.empty()) {
      throw std::invalid_argument("profile: eigenvalue and population lengths differ or are empty");
    }
    double total = 0.0;
    for (double p : populations) {
      if (!(p >= 0.0)) throw std::invalid_argument("profile: negative population");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("profile: populations do not sum to 1");
  }

  static PopulationProfile from_amplitudes(const SpectralModel& model, const ComplexVector& c) {
    PopulationProfile p{model.eigenvalues, distfilter::populations(c)};
    p.validate();
    return p;
  }

  /// sum_j lambda_j^a |c_j|^(2b)
  double moment(int a, int b) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < populations.size(); ++j) {
      acc += std::pow(eigenvalues[j], a) * std::pow(populations[j], b);
    }
    return acc;
  }
};

inline double sum_c4(const PopulationProfile& p) { return p.moment(0, 2); }

inline double weak_success_rate(const PopulationProfile& p, int k) {
  if (k < 0) throw std::invalid_argument("weak_success_rate: k must be >= 0");
  const double c4 = sum_c4(p);
  return c4 + std::pow(0.75, k) * (1.0 - c4);
}

inline double strong_success_rate(const PopulationProfile& p, int k) {
  if (k < 0) throw std::invalid_argument("strong_success_rate: k must be >= 0");
  const double c4 = sum_c4(p);
  return std::pow(0.75, k) * c4 + std::pow(0.5, k) * (1.0 - c4);
}

inline double multi_weak_floor(const PopulationProfile& p, int s) {
  if (s < 2) throw std::invalid_argument("multi_weak_floor: s must be >= 2");
  return p.moment(0, s);
}

inline double energy_limit(const PopulationProfile& p) { return p.moment(1, 2) / p.moment(0, 2); }

inline double spread_limit(const PopulationProfile& p) {
  const double c4 = p.moment(0, 2);
  const double e = p.moment(1, 2) / c4;
  return std::max(0.0, p.moment(2, 2) / c4 - e * e);
}

inline double initial_energy(const PopulationProfile& p) { return p.moment(1, 1); }

inline double initial_spread(const PopulationProfile& p) {
  const double e = p.moment(1, 1);
  return std::max(0.0, p.moment(2, 1) - e * e);
}

namespace analytics_detail {

// Populations reweighted as |c|^2 (1 + g |c|^2), g = base^K - 1.
inline double weighted_mean(const PopulationProfile& p, double g, int power) {
  return (p.moment(power, 1) + g * p.moment(power, 2)) / (1.0 + g * p.moment(0, 2));
}

inline double weight_gain(double base, int K) {
  if (K < 0) throw std::invalid_argument("approximation: K must be >= 0");
  return std::pow(base, K) - 1.0;
}

inline double spread_at_gain(const PopulationProfile& p, double g) {
  if (std::isinf(g)) return spread_limit(p);
  const double e = weighted_mean(p, g, 1);
  return std::max(0.0, weighted_mean(p, g, 2) - e * e);
}

inline double energy_at_gain(const PopulationProfile& p, double g) {
  if (std::isinf(g)) return energy_limit(p);
  return weighted_mean(p, g, 1);
}

}  // namespace analytics_detail

inline double weak_energy_approx(const PopulationProfile& p, int K) {
  return analytics_detail::energy_at_gain(p, analytics_detail::weight_gain(4.0 / 3.0, K));
}

/// Conjectured approximation.
inline double strong_energy_approx(const PopulationProfile& p, int K) {
  return analytics_detail::energy_at_gain(p, analytics_detail::weight_gain(1.5, K));
}

inline double spread_approx_weak(const PopulationProfile& p, int K) {
  return analytics_detail::spread_at_gain(p, analytics_detail::weight_gain(4.0 / 3.0, K));
}

/// Conjectured approximation.
inline double spread_approx_strong(const PopulationProfile& p, int K) {
  return analytics_detail::spread_at_gain(p, analytics_detail::weight_gain(1.5, K));
}

// ---------------------------------------------------------------------------
// Gaussian continuum model: density of states N(0, sigma2) and populations
// A exp(-(lambda - mu)^2 / (2 xi2)).
//
// `dimension` is the number of eigenstates the continuum stands for. The
// closed forms below treat the density of states as a unit-mass
// distribution, so sums of |c|^4 pick up a factor 1/dimension when the
// model is compared with a finite spectrum. The default of 1 gives the
// closed forms unchanged.

struct GaussianSpec {
  double mu = 0.0;
  double xi2 = 1.0;
  double sigma2 = 1.0;
  double dimension = 1.0;

  void validate() const {
    if (!(xi2 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("gaussian: variances must be positive");
    if (!std::isfinite(mu) || !std::isfinite(xi2) || !std::isfinite(sigma2)) {
      throw std::invalid_argument("gaussian: non-finite parameter");
    }
    if (!(dimension >= 1.0)) throw std::invalid_argument("gaussian: dimension must be >= 1");
  }
};

/// Moment fit from a discrete profile: mu and xi2 are the weighted mean and
/// variance of the populations over lambda, sigma2 the eigenvalue variance.
inline GaussianSpec fit_gaussian(const PopulationProfile& p) {
  p.validate();
  const double n = static_cast<double>(p.eigenvalues.size());
  const double mean_l = std::accumulate(p.eigenvalues.begin(), p.eigenvalues.end(), 0.0) / n;
  double sigma2 = 0.0;
  for (double l : p.eigenvalues) sigma2 += (l - mean_l) * (l - mean_l);
  sigma2 /= n;
  const double mu = p.moment(1, 1) - mean_l;
  const double xi2 = p.moment(2, 1) - p.moment(1, 1) * p.moment(1, 1);
  GaussianSpec g{mu, xi2, sigma2, n};
  g.validate();
  return g;
}

inline double gaussian_normalization(const GaussianSpec& g) {
  g.validate();
  const double t = g.xi2 + g.sigma2;
  return std::exp(g.mu * g.mu / (2.0 * t)) * std::sqrt(t) / std::sqrt(g.xi2);
}

namespace analytics_detail {

inline double gaussian_overlap_exp(const GaussianSpec& g) {
  const double x2 = g.xi2, s2 = g.sigma2;
  return std::exp(g.mu * g.mu * s2 / (x2 * x2 + 3.0 * x2 * s2 + 2.0 * s2 * s2));
}

}  // namespace analytics_detail

inline double gaussian_c4(const GaussianSpec& g) {
  g.validate();
  const double x2 = g.xi2, s2 = g.sigma2, mu2 = g.mu * g.mu;
  const double e = std::exp(mu2 / (x2 + s2) - mu2 / (x2 + 2.0 * s2));
  return e * (x2 + s2) / (std::sqrt(x2) * std::sqrt(x2 + 2.0 * s2)) / g.dimension;
}

/// sum_j lambda_j |c_j|^4 in the continuum.
inline double gaussian_lambda_c4(const GaussianSpec& g) {
  g.validate();
  const double x2 = g.xi2, s2 = g.sigma2, mu2 = g.mu * g.mu;
  const double e = std::exp(mu2 / (x2 + s2) - mu2 / (x2 + 2.0 * s2));
  return 2.0 * e * g.mu * s2 * (x2 + s2) / (std::sqrt(x2) * std::pow(x2 + 2.0 * s2, 1.5)) / g.dimension;
}

/// sum_j lambda_j^2 |c_j|^4 in the continuum.
inline double gaussian_lambda2_c4(const GaussianSpec& g) {
  g.validate();
  const double x2 = g.xi2, s2 = g.sigma2, mu2 = g.mu * g.mu;
  const double e = std::exp(mu2 / (x2 + s2) - mu2 / (x2 + 2.0 * s2));
  return e * s2 * (x2 + s2) * (x2 * x2 + 4.0 * mu2 * s2 + 2.0 * x2 * s2) /
         (std::sqrt(x2) * std::pow(x2 + 2.0 * s2, 2.5)) / g.dimension;
}

inline double gaussian_energy(const GaussianSpec& g, int K) {
  g.validate();
  const double gain = analytics_detail::weight_gain(4.0 / 3.0, K) / g.dimension;
  const double x2 = g.xi2, s2 = g.sigma2, x = std::sqrt(x2);
  if (std::isinf(gain)) return g.mu / (x2 / (2.0 * s2) + 1.0);
  const double e = analytics_detail::gaussian_overlap_exp(g);
  const double num = 1.0 + 2.0 * gain * e * (x2 + s2) * (x2 + s2) / (x * std::pow(x2 + 2.0 * s2, 1.5));
  const double den = 1.0 + gain * e * (x2 + s2) / (x * std::sqrt(x2 + 2.0 * s2));
  return g.mu * s2 * num / ((x2 + s2) * den);
}

inline double gaussian_spread(const GaussianSpec& g, int K) {
  g.validate();
  const double gain = analytics_detail::weight_gain(4.0 / 3.0, K) / g.dimension;
  const double x2 = g.xi2, s2 = g.sigma2, x = std::sqrt(x2), mu = g.mu;
  if (std::isinf(gain)) {
    const double c4 = gaussian_c4(g);
    const double e = gaussian_lambda_c4(g) / c4;
    return gaussian_lambda2_c4(g) / c4 - e * e;
  }
  const double e = analytics_detail::gaussian_overlap_exp(g);
  const double r = gain * e * (x2 + s2) / (x * std::sqrt(x2 + 2.0 * s2));
  const double theta = (1.0 + r) * (1.0 + r);
  const double inner = mu + 2.0 * gain * e * mu * (x2 + s2) * (x2 + s2) / (x * std::pow(x2 + 2.0 * s2, 1.5));
  const double gamma = -s2 * inner * inner;
  const double xi_term = (1.0 + r) * (x2 * x2 + (mu * mu + x2) * s2 +
                                      gain * e * std::pow(x2 + s2, 3) * (x2 * x2 + 4.0 * mu * mu * s2 + 2.0 * x2 * s2) /
                                          (x * std::pow(x2 + 2.0 * s2, 2.5)));
  return s2 / ((x2 + s2) * (x2 + s2)) * (gamma + xi_term) / theta;
}

inline double gaussian_spread_drop(const GaussianSpec& g) {
  g.validate();
  const double r = g.xi2 / g.sigma2;
  return g.xi2 / ((r + 1.0) * (r + 2.0));
}

inline double gaussian_bias(const GaussianSpec& g) {
  g.validate();
  return std::abs(g.mu / (g.xi2 / (2.0 * g.sigma2) + 1.0) - g.mu / (g.xi2 / g.sigma2 + 1.0));
}

/// sup over xi2/sigma2 of gaussian_bias / |mu|.
inline double gaussian_bias_bound() { return 1.0 / (2.0 * std::sqrt(2.0) + 3.0); }

// ---------------------------------------------------------------------------
// Resources

inline std::uint64_t bell_pairs_per_iteration(int s) {
  if (s < 1) throw std::invalid_argument("bell_pairs_per_iteration: s must be >= 1");
  return static_cast<std::uint64_t>(s - 1);
}

struct ExpectedCost {
  double controlled_evolutions = 0.0;
  double bell_pairs = 0.0;
  double evolutions_per_state = 0.0;
  double bell_pairs_per_state = 0.0;
};

/// Expected resources to reach K consecutive accepted iterations when every
/// rejection restarts from scratch. survival[k] is the probability that the
/// first k iterations are all accepted (survival[0] = 1).
inline ExpectedCost expected_cost(std::span<const double> survival, int s, int K) {
  if (s < 1) throw std::invalid_argument("expected_cost: s must be >= 1");
  if (K < 0 || static_cast<std::size_t>(K) >= survival.size()) {
    throw std::invalid_argument("expected_cost: survival curve shorter than K + 1");
  }
  double attempts = 0.0;
  if (K > 0) {
    const double target = survival[static_cast<std::size_t>(K)];
    if (!(target > 0.0)) {
      attempts = std::numeric_limits<double>::infinity();
    } else {
      for (int i = 0; i < K; ++i) attempts += survival[static_cast<std::size_t>(i)] / target;
    }
  }
  ExpectedCost out;
  out.controlled_evolutions = static_cast<double>(s) * attempts;
  out.bell_pairs = static_cast<double>(s - 1) * attempts;
  out.evolutions_per_state = out.controlled_evolutions / s;
  out.bell_pairs_per_state = out.bell_pairs / s;
  return out;
}

inline std::vector<ExpectedCost> expected_cost_curve(std::span<const double> survival, int s) {
  std::vector<ExpectedCost> curve;
  curve.reserve(survival.size());
  for (std::size_t k = 0; k < survival.size(); ++k) curve.push_back(expected_cost(survival, s, static_cast<int>(k)));
  return curve;
}

}  // namespace distfilter
