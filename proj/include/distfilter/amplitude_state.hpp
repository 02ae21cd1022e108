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
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "distfilter/spectral.hpp"

namespace distfilter {

inline constexpr int kMaxDevices = 6;
inline constexpr std::size_t kMaxJointAmplitudes = std::size_t{1} << 16;

inline std::size_t int_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Throws if an s-device run over n-qubit registers exceeds the engine guards.
inline void check_engine_guard(int s, int n) {
  if (s < 1) throw std::invalid_argument("engine: device count must be >= 1");
  if (s > kMaxDevices) {
    throw std::invalid_argument("engine: s=" + std::to_string(s) + " exceeds the outcome guard (s <= " +
                                std::to_string(kMaxDevices) + ")");
  }
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("engine: qubit count out of range");
  if (static_cast<long>(s) * n > 16) {
    throw std::invalid_argument("engine: s*n = " + std::to_string(s * n) + " exceeds the joint-state guard (16)");
  }
}

/// Joint state of s devices in the eigenbasis. The flat index of the tuple
/// (j_1, ..., j_s) is j_1 N^{s-1} + ... + j_s, so device 1 is most significant.
struct AmplitudeState {
  int s = 1;
  int n = 1;
  std::size_t dim = 2;  // N = 2^n per device
  ComplexVector amplitudes;

  static AmplitudeState copies(const ComplexVector& single, int s, int n) {
    check_engine_guard(s, n);
    AmplitudeState st;
    st.s = s;
    st.n = n;
    st.dim = std::size_t{1} << n;
    if (single.size() != st.dim) throw std::invalid_argument("AmplitudeState: single-device dimension mismatch");
    st.amplitudes.assign(int_pow(st.dim, s), Complex(1.0, 0.0));
    const std::size_t total = st.amplitudes.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      Complex a(1.0, 0.0);
      for (int l = 0; l < s; ++l) {
        a *= single[rest % st.dim];
        rest /= st.dim;
      }
      st.amplitudes[idx] = a;
    }
    return st;
  }

  std::size_t size() const { return amplitudes.size(); }

  /// Digit of device l (0-based) in the flat index.
  std::size_t digit(std::size_t flat, int l) const {
    for (int m = s - 1; m > l; --m) flat /= dim;
    return flat % dim;
  }

  void digits(std::size_t flat, std::size_t* out) const {
    for (int l = s - 1; l >= 0; --l) {
      out[l] = flat % dim;
      flat /= dim;
    }
  }

  std::size_t flat_index(const std::size_t* d) const {
    std::size_t flat = 0;
    for (int l = 0; l < s; ++l) flat = flat * dim + d[l];
    return flat;
  }

  double norm_squared() const {
    double total = 0.0;
    for (const auto& a : amplitudes) total += std::norm(a);
    return total;
  }

  void normalize() {
    const double norm = std::sqrt(norm_squared());
    if (!(norm > 0.0)) throw std::runtime_error("AmplitudeState: cannot normalize a zero state");
    for (auto& a : amplitudes) a /= norm;
  }

  /// Populations of device l's reduced state.
  std::vector<double> marginal(int l) const {
    std::vector<double> p(dim, 0.0);
    std::size_t stride = 1;
    for (int m = s - 1; m > l; --m) stride *= dim;
    for (std::size_t idx = 0; idx < amplitudes.size(); ++idx) p[(idx / stride) % dim] += std::norm(amplitudes[idx]);
    return p;
  }
};

/// max |c_{j_1 j_2 ... j_s} - c_{j_2 ... j_s j_1}|.
inline double cyclic_shift_defect(const AmplitudeState& st) {
  double worst = 0.0;
  std::vector<std::size_t> d(static_cast<std::size_t>(st.s)), shifted(d.size());
  for (std::size_t idx = 0; idx < st.size(); ++idx) {
    st.digits(idx, d.data());
    for (int l = 0; l < st.s; ++l) shifted[static_cast<std::size_t>(l)] = d[static_cast<std::size_t>((l + 1) % st.s)];
    worst = std::max(worst, std::abs(st.amplitudes[idx] - st.amplitudes[st.flat_index(shifted.data())]));
  }
  return worst;
}

/// Distance from the closest s-fold product v^{\otimes s}: v is read off the
/// dominant diagonal entry, which fixes the global phase alignment.
inline double product_defect(const AmplitudeState& st) {
  const std::size_t dim = st.dim;
  std::vector<std::size_t> d(static_cast<std::size_t>(st.s));
  std::size_t pivot = 0;
  double pivot_mag = -1.0;
  for (std::size_t j = 0; j < dim; ++j) {
    std::fill(d.begin(), d.end(), j);
    const double mag = std::abs(st.amplitudes[st.flat_index(d.data())]);
    if (mag > pivot_mag) {
      pivot_mag = mag;
      pivot = j;
    }
  }
  if (!(pivot_mag > 0.0)) return std::sqrt(st.norm_squared());
  std::fill(d.begin(), d.end(), pivot);
  const Complex diag = st.amplitudes[st.flat_index(d.data())];
  const Complex root = std::polar(std::pow(std::abs(diag), 1.0 / st.s), std::arg(diag) / st.s);
  const Complex scale = std::pow(root, st.s - 1);
  ComplexVector v(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    std::fill(d.begin(), d.end(), pivot);
    d[0] = j;
    v[j] = st.amplitudes[st.flat_index(d.data())] / scale;
  }
  double worst = 0.0;
  for (std::size_t idx = 0; idx < st.size(); ++idx) {
    st.digits(idx, d.data());
    Complex prod(1.0, 0.0);
    for (int l = 0; l < st.s; ++l) prod *= v[d[static_cast<std::size_t>(l)]];
    worst = std::max(worst, std::abs(st.amplitudes[idx] - prod));
  }
  return worst;
}

}  // namespace distfilter
