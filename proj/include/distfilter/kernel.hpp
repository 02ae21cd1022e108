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
#include <array>
#include <cstdint>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "distfilter/amplitude_state.hpp"
#include "distfilter/phases.hpp"
#include "distfilter/postselection.hpp"
#include "distfilter/rng.hpp"

namespace distfilter {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPruneThreshold = 1e-15;
inline constexpr double kMassTolerance = 1e-9;

/// Inverse-CDF draw over lexicographically ordered outcome probabilities.
/// Entries below kPruneThreshold are never selected.
inline std::size_t sample_index(std::span<const double> probabilities, double u) {
  double total = 0.0;
  for (double p : probabilities) total += p >= kPruneThreshold ? p : 0.0;
  if (!(total > 0.0)) throw NumericalError("sample_index: no outcome carries probability mass");
  const double target = u * total;
  double acc = 0.0;
  std::size_t last = probabilities.size();
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] < kPruneThreshold) continue;
    last = i;
    acc += probabilities[i];
    if (target < acc) return i;
  }
  return last;
}

inline void check_mass(double total, const char* where) {
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw NumericalError(std::string(where) + ": outcome probabilities sum to " + std::to_string(total));
  }
}

// ---------------------------------------------------------------------------
// Single device: one Hadamard test with controlled exp(-iHt).

inline std::array<double, 2> single_device_probabilities(std::span<const Complex> c, std::span<const double> phases) {
  if (c.size() != phases.size()) throw std::invalid_argument("single_device_step: phase/state size mismatch");
  double p0 = 0.0;
  double p1 = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double w = std::norm(c[j]);
    const double cs = std::cos(phases[j]);
    p0 += 0.5 * w * (1.0 + cs);
    p1 += 0.5 * w * (1.0 - cs);
  }
  return {p0, p1};
}

/// c'_j ∝ c_j (1 + (-1)^m e^{i phi_j}) / 2 in place; returns P_m.
inline double apply_single_outcome(ComplexVector& c, std::span<const double> phases, int m, double probability) {
  const double sign = m == 0 ? 1.0 : -1.0;
  const double inv = 1.0 / std::sqrt(probability);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= 0.5 * (1.0 + sign * std::polar(1.0, phases[j])) * inv;
  return probability;
}

struct SingleStepResult {
  ComplexVector state;
  int m = 0;
  double probability = 0.0;
  std::array<double, 2> distribution{};
};

inline SingleStepResult single_device_step(const ComplexVector& c, const PhaseSample& phases, Rng& rng) {
  SingleStepResult out;
  out.distribution = single_device_probabilities(c, phases.phases);
  check_mass(out.distribution[0] + out.distribution[1], "single_device_step");
  out.m = static_cast<int>(sample_index(out.distribution, uniform01(rng)));
  out.probability = out.distribution[static_cast<std::size_t>(out.m)];
  if (!(out.probability > 0.0)) throw NumericalError("single_device_step: sampled a zero-probability branch");
  out.state = c;
  apply_single_outcome(out.state, phases.phases, out.m, out.probability);
  return out;
}

// ---------------------------------------------------------------------------
// s devices: cyclic permutation test across the device auxiliary qubits.
//
// For outcome (alpha, b) the tuple (j_1..j_s) picks up the diagonal factor
//
//   F = (1/s) sum_q w^{q alpha} prod_l h_{b_l}(phi_{j_{l+q mod s}}),
//   h_b(phi) = (1 + (-1)^b e^{i phi}) / 2,  w = e^{2 pi i / s},
//
// which is the 2^{-s} s^{-1} sum_a (-1)^{a.b} ... form with the sum over the
// auxiliary register a carried out per device.

// Plain complex product; std::complex operator* carries inf/nan recovery
// that dominates the inner loops.
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// r * w^m with w = e^{2 pi i / s}; components that vanish exactly (m s / 4
/// integral) are set to zero so that sums over a full orbit cancel exactly.
inline Complex root_of_unity(int m, int s, double r = 1.0) {
  const int k = ((m % s) + s) % s;
  const double angle = kTwoPi * k / s;
  double re = std::cos(angle), im = std::sin(angle);
  if ((4 * k) % s == 0) {
    const int quarter = 4 * k / s;
    re = quarter == 0 ? 1.0 : quarter == 2 ? -1.0 : 0.0;
    im = quarter == 1 ? 1.0 : quarter == 3 ? -1.0 : 0.0;
  }
  return {r * re, r * im};
}

class FilterKernel {
 public:
  FilterKernel(int s, std::size_t dim) : s_(s), dim_(dim), nbits_(std::size_t{1} << s) {
    if (s < 1 || s > kMaxDevices) throw std::invalid_argument("FilterKernel: device count out of range");
    rotation_.assign(static_cast<std::size_t>(s) * nbits_, 0);
    for (int q = 0; q < s; ++q) {
      for (std::size_t b = 0; b < nbits_; ++b) {
        // b'_m = b_{m-q}
        std::size_t rotated = 0;
        for (int m = 0; m < s; ++m) {
          const int src = ((m - q) % s + s) % s;
          const std::size_t bit = (b >> (s - 1 - src)) & 1U;
          rotated |= bit << (s - 1 - m);
        }
        rotation_[static_cast<std::size_t>(q) * nbits_ + b] = rotated;
      }
    }
    orbit_rep_.resize(nbits_);
    for (std::size_t b = 0; b < nbits_; ++b) {
      std::size_t rep = b;
      for (int q = 0; q < s; ++q) rep = std::min(rep, rotation_[static_cast<std::size_t>(q) * nbits_ + b]);
      orbit_rep_[b] = rep;
      if (rep == b) orbit_reps_.push_back(b);
    }
    weights_.resize(static_cast<std::size_t>(s * s));
    for (int q = 0; q < s; ++q) {
      for (int a = 0; a < s; ++a) {
        weights_[static_cast<std::size_t>(q * s + a)] = root_of_unity(q * a, s, 1.0 / s);
      }
    }
    h_.resize(2 * dim_);
    products_.resize(nbits_);
    scratch_.resize(nbits_);
    digits_.resize(static_cast<std::size_t>(s));
  }

  int devices() const { return s_; }
  std::size_t outcome_count() const { return static_cast<std::size_t>(s_) * nbits_; }

  /// Exact probability of each outcome, indexed by Outcome::index().
  std::vector<double> probabilities(const AmplitudeState& st, std::span<const double> phases) {
    check_shapes(st, phases);
    load_phases(phases);
    std::vector<double> probs(outcome_count(), 0.0);
    std::fill(digits_.begin(), digits_.end(), 0);
    for (std::size_t idx = 0; idx < st.size(); ++idx, advance_digits()) {
      const double pop = std::norm(st.amplitudes[idx]);
      if (pop == 0.0) continue;
      tuple_products();
      for (int a = 0; a < s_; ++a) {
        const Complex* w = weights_.data() + a;
        for (std::size_t b : orbit_reps_) {
          Complex f = 0.0;
          const std::size_t* rot = rotation_.data() + b;
          for (int q = 0; q < s_; ++q) f += cmul(w[q * s_], products_[rot[static_cast<std::size_t>(q) * nbits_]]);
          probs[(static_cast<std::size_t>(a) << s_) | b] += pop * std::norm(f);
        }
      }
    }
    // rotating b only rephases F, so each rotation orbit shares one probability
    for (int a = 0; a < s_; ++a) {
      for (std::size_t b = 0; b < nbits_; ++b) {
        const std::size_t base = static_cast<std::size_t>(a) << s_;
        probs[base | b] = probs[base | orbit_rep_[b]];
      }
    }
    return probs;
  }

  /// Diagonal factor F_{alpha,b}(j_1..j_s) for one tuple.
  Complex factor(const std::size_t* digits, std::span<const double> phases, const Outcome& o) const {
    Complex f = 0.0;
    for (int q = 0; q < s_; ++q) {
      Complex prod(1.0, 0.0);
      for (int l = 0; l < s_; ++l) {
        const double phi = phases[digits[static_cast<std::size_t>((l + q) % s_)]];
        prod *= 0.5 * (1.0 + (o.bit(l) ? -1.0 : 1.0) * std::polar(1.0, phi));
      }
      f += weights_[static_cast<std::size_t>(q * s_ + o.top)] * prod;
    }
    return f;
  }

  /// Projects onto outcome o and renormalizes by sqrt(probability).
  void apply(AmplitudeState& st, std::span<const double> phases, const Outcome& o, double probability) {
    check_shapes(st, phases);
    load_phases(phases);
    const double inv = 1.0 / std::sqrt(probability);
    std::fill(digits_.begin(), digits_.end(), 0);
    for (std::size_t idx = 0; idx < st.size(); ++idx, advance_digits()) {
      if (st.amplitudes[idx] == Complex(0.0, 0.0)) continue;
      Complex f = 0.0;
      for (int q = 0; q < s_; ++q) {
        Complex prod(1.0, 0.0);
        for (int l = 0; l < s_; ++l) {
          prod = cmul(prod, h_[2 * digits_[static_cast<std::size_t>((l + q) % s_)] + static_cast<std::size_t>(o.bit(l))]);
        }
        f += cmul(weights_[static_cast<std::size_t>(q * s_ + o.top)], prod);
      }
      st.amplitudes[idx] = cmul(st.amplitudes[idx], f * inv);
    }
  }

 private:
  void check_shapes(const AmplitudeState& st, std::span<const double> phases) const {
    if (st.s != s_ || st.dim != dim_) throw std::invalid_argument("FilterKernel: state shape mismatch");
    if (phases.size() != dim_) throw std::invalid_argument("FilterKernel: phase vector length mismatch");
  }

  // odometer over tuples in flat order, device 1 most significant
  void advance_digits() {
    for (int l = s_ - 1; l >= 0; --l) {
      auto& d = digits_[static_cast<std::size_t>(l)];
      if (++d < dim_) return;
      d = 0;
    }
  }

  void load_phases(std::span<const double> phases) {
    for (std::size_t j = 0; j < dim_; ++j) {
      const Complex e = std::polar(1.0, phases[j]);
      h_[2 * j] = 0.5 * (1.0 + e);
      h_[2 * j + 1] = 0.5 * (1.0 - e);
    }
  }

  // products_[b] = prod_m h_{b_m}(phi_{j_m}), device 1 as the top bit of b.
  void tuple_products() {
    products_[0] = 1.0;
    std::size_t width = 1;
    for (int m = 0; m < s_; ++m) {
      const std::size_t base = 2 * digits_[static_cast<std::size_t>(m)];
      for (std::size_t i = 0; i < width; ++i) {
        scratch_[2 * i] = cmul(products_[i], h_[base]);
        scratch_[2 * i + 1] = cmul(products_[i], h_[base + 1]);
      }
      width *= 2;
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(width), products_.begin());
    }
  }

  int s_;
  std::size_t dim_;
  std::size_t nbits_;
  std::vector<std::size_t> rotation_;
  std::vector<std::size_t> orbit_rep_;
  std::vector<std::size_t> orbit_reps_;
  std::vector<Complex> weights_;
  std::vector<Complex> h_;
  std::vector<Complex> products_;
  std::vector<Complex> scratch_;
  std::vector<std::size_t> digits_;
};

struct MultiStepResult {
  AmplitudeState state;
  IterationOutcome outcome;
  std::vector<double> distribution;
};

inline MultiStepResult multi_device_step(const AmplitudeState& state, const PhaseSample& phases, Rng& rng) {
  if (state.s < 2) throw std::invalid_argument("multi_device_step: needs s >= 2");
  FilterKernel kernel(state.s, state.dim);
  MultiStepResult out;
  out.distribution = kernel.probabilities(state, phases.phases);
  double total = 0.0;
  for (double p : out.distribution) total += p;
  check_mass(total, "multi_device_step");
  const std::size_t pick = sample_index(out.distribution, uniform01(rng));
  out.outcome.outcome = Outcome::from_index(state.s, pick);
  out.outcome.probability = out.distribution[pick];
  out.state = state;
  kernel.apply(out.state, phases.phases, out.outcome.outcome, out.outcome.probability);
  return out;
}

// ---------------------------------------------------------------------------
// s identical copies of one device state c. Substituting m = l + q in F, the
// tuple sum factorizes over devices:
//
//   P(alpha, b) = s^-2 sum_{q,q'} w^{(q-q') alpha} prod_m G(b_{m-q}, b_{m-q'}),
//   G(x, y) = sum_j |c_j|^2 h_x(phi_j) conj(h_y(phi_j)).
//
// Strong-accepted outcomes keep the product form: (0, 0..0) maps c_j to
// c_j h_0(phi_j) and (0, 1..1) to c_j h_1(phi_j) on every device.

inline std::vector<double> product_state_probabilities(std::span<const Complex> c, std::span<const double> phases,
                                                       int s) {
  if (s < 2 || s > kMaxDevices) throw std::invalid_argument("product_state_probabilities: device count out of range");
  if (c.size() != phases.size()) throw std::invalid_argument("product_state_probabilities: phase vector length mismatch");
  std::array<std::array<Complex, 2>, 2> g{};
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double p = std::norm(c[j]);
    const Complex e = std::polar(1.0, phases[j]);
    const std::array<Complex, 2> h{0.5 * (1.0 + e), 0.5 * (1.0 - e)};
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) g[x][y] += p * h[x] * std::conj(h[y]);
    }
  }
  const std::size_t nbits = std::size_t{1} << s;
  std::vector<double> probs(static_cast<std::size_t>(s) * nbits, 0.0);
  auto bit = [s](std::size_t b, int l) { return static_cast<int>((b >> (s - 1 - l)) & 1U); };
  for (std::size_t b = 0; b < nbits; ++b) {
    // term[d] = sum over q - q' = d (mod s) of prod_m G(...)
    std::vector<Complex> term(static_cast<std::size_t>(s), 0.0);
    for (int q = 0; q < s; ++q) {
      for (int q2 = 0; q2 < s; ++q2) {
        Complex prod(1.0, 0.0);
        for (int m = 0; m < s; ++m) prod *= g[bit(b, (m - q + s) % s)][bit(b, (m - q2 + s) % s)];
        term[static_cast<std::size_t>((q - q2 + s) % s)] += prod;
      }
    }
    for (int a = 0; a < s; ++a) {
      Complex total = 0.0;
      for (int d = 0; d < s; ++d) total += root_of_unity(a * d, s) * term[static_cast<std::size_t>(d)];
      probs[(static_cast<std::size_t>(a) << s) | b] = std::max(0.0, total.real()) / (static_cast<double>(s) * s);
    }
  }
  return probs;
}

/// Applies a strong-accepted outcome to the shared device state.
inline void apply_product_outcome(ComplexVector& c, std::span<const double> phases, const Outcome& o) {
  const bool all_zero = o.bits == 0;
  const bool all_one = o.bits == (std::uint32_t{1} << o.s) - 1;
  if (o.top != 0 || !(all_zero || all_one)) {
    throw std::invalid_argument("apply_product_outcome: outcome does not preserve the product form");
  }
  const int m = all_zero ? 0 : 1;
  double norm = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const Complex e = std::polar(1.0, phases[j]);
    c[j] *= 0.5 * (m == 0 ? 1.0 + e : 1.0 - e);
    norm += std::norm(c[j]);
  }
  if (!(norm > 0.0)) throw NumericalError("apply_product_outcome: zero-norm branch");
  const double inv = 1.0 / std::sqrt(norm);
  for (auto& a : c) a *= inv;
}

// ---------------------------------------------------------------------------
// Two devices: closed-form weights Theta^{ab}_alpha with
// P^{ab}_alpha = (1/64) sum_{j,j'} |c_{jj'}|^2 Theta^{ab}_alpha.

struct ThetaConstants {
  double same = 16.0;   // Theta^{00}_0, Theta^{11}_0 prefactor
  double cross = 8.0;   // Theta^{01}_0, Theta^{01}_1 prefactor
  double norm = 64.0;
};

/// Theta^{ab}_alpha(phi_j, phi_j') indexed by Outcome::index() for s = 2.
inline std::array<double, 8> theta_weights(double phi, double phi2, const ThetaConstants& k = {}) {
  const double c1 = std::cos(phi);
  const double c2 = std::cos(phi2);
  std::array<double, 8> t{};
  t[0b000] = k.same * (1.0 + c1) * (1.0 + c2);
  t[0b001] = k.cross * (1.0 - std::cos(phi + phi2));
  t[0b010] = t[0b001];
  t[0b011] = k.same * (1.0 - c1) * (1.0 - c2);
  t[0b100] = 0.0;
  t[0b101] = k.cross * (1.0 - std::cos(phi - phi2));
  t[0b110] = t[0b101];
  t[0b111] = 0.0;
  return t;
}

inline std::vector<double> theta_probabilities(const AmplitudeState& st, std::span<const double> phases,
                                               const ThetaConstants& k = {}) {
  if (st.s != 2) throw std::invalid_argument("theta_probabilities: only defined for two devices");
  if (phases.size() != st.dim) throw std::invalid_argument("theta_probabilities: phase vector length mismatch");
  std::vector<double> probs(8, 0.0);
  for (std::size_t j = 0; j < st.dim; ++j) {
    for (std::size_t j2 = 0; j2 < st.dim; ++j2) {
      const double pop = std::norm(st.amplitudes[j * st.dim + j2]);
      if (pop == 0.0) continue;
      const auto t = theta_weights(phases[j], phases[j2], k);
      for (std::size_t o = 0; o < 8; ++o) probs[o] += pop * t[o] / k.norm;
    }
  }
  return probs;
}

/// Diagonals (in the two-device eigenbasis) of the eight Kraus operators
/// E^{ab}_alpha built from I and U = diag(e^{i phi}):
///   E^{00}_0 = (I+U)(x)(I+U)/4,  E^{01}_0 = E^{10}_0 = (I(x)I - U(x)U)/4,
///   E^{11}_0 = (I-U)(x)(I-U)/4,  E^{01}_1 = -E^{10}_1 = (U(x)I - I(x)U)/4,
///   E^{00}_1 = E^{11}_1 = 0.
inline std::array<ComplexVector, 8> two_device_kraus_diagonals(std::span<const double> phases) {
  const std::size_t dim = phases.size();
  std::array<ComplexVector, 8> ops;
  for (auto& op : ops) op.assign(dim * dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    const Complex u1 = std::polar(1.0, phases[j]);
    for (std::size_t j2 = 0; j2 < dim; ++j2) {
      const Complex u2 = std::polar(1.0, phases[j2]);
      const std::size_t idx = j * dim + j2;
      ops[0b000][idx] = 0.25 * (1.0 + u1) * (1.0 + u2);
      ops[0b001][idx] = 0.25 * (1.0 - u1 * u2);
      ops[0b010][idx] = ops[0b001][idx];
      ops[0b011][idx] = 0.25 * (1.0 - u1) * (1.0 - u2);
      ops[0b101][idx] = 0.25 * (u1 - u2);
      ops[0b110][idx] = -ops[0b101][idx];
    }
  }
  return ops;
}

/// max |sum E^dagger E - I| over the diagonal operator set.
inline double kraus_completeness_defect(std::span<const double> phases) {
  const auto ops = two_device_kraus_diagonals(phases);
  double worst = 0.0;
  for (std::size_t idx = 0; idx < ops[0].size(); ++idx) {
    double total = 0.0;
    for (const auto& op : ops) total += std::norm(op[idx]);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

/// max_{j,j'} |sum_outcomes Theta / norm - 1|.
inline double theta_completeness_defect(std::span<const double> phases, const ThetaConstants& k = {}) {
  double worst = 0.0;
  for (double phi : phases) {
    for (double phi2 : phases) {
      double total = 0.0;
      for (double t : theta_weights(phi, phi2, k)) total += t / k.norm;
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  return worst;
}

}  // namespace distfilter
