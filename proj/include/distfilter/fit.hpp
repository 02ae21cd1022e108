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
#include <span>
#include <stdexcept>
#include <string>

namespace distfilter {

struct DecayFit {
  double eta = 0.0;        // series ~ exp(-eta k)
  double intercept = 0.0;  // log-series value at k = 0
  double residual = 0.0;   // RMS residual of the log-linear fit
  int points = 0;
};

/// Least-squares line through log(series[k]) for k in [k_min, k_max].
inline DecayFit fit_decay(std::span<const double> series, int k_min, int k_max) {
  if (k_min < 0 || k_max < k_min + 1 || static_cast<std::size_t>(k_max) >= series.size()) {
    throw std::invalid_argument("fit_decay: window [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                                "] needs at least two points inside the series");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = k_max - k_min + 1;
  for (int k = k_min; k <= k_max; ++k) {
    const double v = series[static_cast<std::size_t>(k)];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("fit_decay: non-positive or non-finite value at k=" + std::to_string(k));
    }
    const double y = std::log(v);
    sx += k;
    sy += y;
    sxx += static_cast<double>(k) * k;
    sxy += k * y;
  }
  const double mx = sx / m;
  const double my = sy / m;
  const double slope = (sxy - m * mx * my) / (sxx - m * mx * mx);
  DecayFit fit;
  fit.eta = -slope;
  fit.intercept = my - slope * mx;
  fit.points = m;
  double ss = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const double r = std::log(series[static_cast<std::size_t>(k)]) - (fit.intercept + slope * k);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

}  // namespace distfilter
