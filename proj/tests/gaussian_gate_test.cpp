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

#include "distfilter/analytics.hpp"

namespace distfilter {
namespace {

// Continuum sum |c|^4 with moments fitted from the exact n=6 populations
// against the exact discrete sum.
TEST(GaussianGate, FittedC4WithinTwentyFivePercent) {
  const SpectralModel m = decompose(build_hamiltonian({6, 1.0, 1.0, 1.0, 0.0}));
  for (const auto& init : {InitialStateSpec::plus(), InitialStateSpec::minus()}) {
    const auto profile = PopulationProfile::from_amplitudes(m, project_initial(init, m));
    const GaussianSpec g = fit_gaussian(profile);
    const double discrete = sum_c4(profile);
    const double continuum = gaussian_c4(g);
    EXPECT_LE(std::abs(continuum - discrete) / discrete, 0.25)
        << "mu=" << g.mu << " xi2=" << g.xi2 << " sigma2=" << g.sigma2 << " continuum=" << continuum
        << " discrete=" << discrete;
  }
}

}  // namespace
}  // namespace distfilter
