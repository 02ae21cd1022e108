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
#include <cmath>
#include <cstdint>
#include <limits>

namespace distfilter {

/// Streaming mean/covariance over a fixed number of variables (Welford
/// updates, Chan et al. pairwise merge).
template <std::size_t D>
struct Comoments {
  std::uint64_t n = 0;
  std::array<double, D> mean{};
  std::array<std::array<double, D>, D> co{};  // sum of centered products

  void add(const std::array<double, D>& x) {
    ++n;
    std::array<double, D> d{};
    for (std::size_t a = 0; a < D; ++a) {
      d[a] = x[a] - mean[a];
      mean[a] += d[a] / static_cast<double>(n);
    }
    for (std::size_t a = 0; a < D; ++a) {
      for (std::size_t b = 0; b < D; ++b) co[a][b] += d[a] * (x[b] - mean[b]);
    }
  }

  void merge(const Comoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double nt = na + nb;
    std::array<double, D> d{};
    for (std::size_t a = 0; a < D; ++a) d[a] = o.mean[a] - mean[a];
    for (std::size_t a = 0; a < D; ++a) {
      for (std::size_t b = 0; b < D; ++b) co[a][b] += o.co[a][b] + d[a] * d[b] * na * nb / nt;
    }
    for (std::size_t a = 0; a < D; ++a) mean[a] = (na * mean[a] + nb * o.mean[a]) / nt;
    n += o.n;
  }

  /// Sample covariance (n - 1 denominator); NaN below two samples.
  double covariance(std::size_t a, std::size_t b) const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return co[a][b] / static_cast<double>(n - 1);
  }

  double sd(std::size_t a) const { return std::sqrt(std::max(0.0, covariance(a, a))); }

  double se(std::size_t a) const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return sd(a) / std::sqrt(static_cast<double>(n));
  }
};

}  // namespace distfilter
