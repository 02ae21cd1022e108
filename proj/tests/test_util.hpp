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
#include <random>
#include <vector>

#include "distfilter/amplitude_state.hpp"
#include "distfilter/rng.hpp"
#include "distfilter/spectral.hpp"

namespace distfilter::testing {

inline ComplexVector random_unit(std::size_t size, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(size);
  double norm = 0.0;
  for (auto& a : v) {
    a = Complex(g(rng), g(rng));
    norm += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(norm);
  return v;
}

inline std::vector<double> random_phases(std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::vector<double> p(dim);
  for (auto& x : p) x = u(rng);
  return p;
}

inline AmplitudeState random_state(int s, int n, Rng& rng) {
  AmplitudeState st;
  st.s = s;
  st.n = n;
  st.dim = std::size_t{1} << n;
  st.amplitudes = random_unit(int_pow(st.dim, s), rng);
  return st;
}

inline DenseMatrix random_hermitian(int n, Rng& rng) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  std::normal_distribution<double> g;
  DenseMatrix a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace distfilter::testing
