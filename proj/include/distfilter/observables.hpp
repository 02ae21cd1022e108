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

#include <span>
#include <vector>

#include "distfilter/amplitude_state.hpp"
#include "distfilter/spectral.hpp"

namespace distfilter {

struct Observables {
  double energy = 0.0;
  double second_moment = 0.0;  // <H^2>
  double variance = 0.0;       // <H^2> - <H>^2
};

inline Observables observables_from_populations(std::span<const double> p, std::span<const double> eigenvalues) {
  Observables o;
  if (p.empty()) return o;
  double mass = 0.0;
  std::size_t ref = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    mass += p[j];
    if (p[j] > p[ref]) ref = j;
  }
  // moments about the dominant level, normalized by the total mass, so a
  // single populated level gives its eigenvalue and zero variance exactly
  const double base = eigenvalues[ref];
  double shift = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) shift += p[j] * (eigenvalues[j] - base);
  o.energy = base + shift / mass;
  for (std::size_t j = 0; j < p.size(); ++j) o.variance += p[j] * (eigenvalues[j] - o.energy) * (eigenvalues[j] - o.energy);
  o.variance /= mass;
  o.second_moment = o.variance + o.energy * o.energy;
  return o;
}

/// Device-1 energy, <H^2> and variance, i.e. <I..(x)H(x)..I> evaluated on the
/// joint pure state. Diagonal observables only need the marginal populations.
inline Observables reduced_observables(const AmplitudeState& st, const SpectralModel& model) {
  const std::vector<double> p = st.marginal(0);
  return observables_from_populations(p, model.eigenvalues);
}

}  // namespace distfilter
