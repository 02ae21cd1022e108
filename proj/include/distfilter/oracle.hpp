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
#include <bit>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "distfilter/amplitude_state.hpp"
#include "distfilter/phases.hpp"
#include "distfilter/postselection.hpp"
#include "distfilter/spectral.hpp"

namespace distfilter {

// Literal statevector simulation of the filtering circuit in the
// computational basis: s-level top qudit (absent for s = 1), one auxiliary
// qubit per device and s system registers of n qubits. Used only to validate
// the eigenbasis engine.
//
//   top: F|0>         aux: H          controlled-U on each device
//   controlled-D^q    (D moves the qubit in slot l to slot l+1)
//   top: F^dagger     aux: H          measure everything

inline constexpr int kOracleUnitBudget = 14;
inline constexpr double kOracleProbabilityFloor = 1e-14;

struct OracleBranch {
  Outcome outcome;
  double probability = 0.0;
  AmplitudeState state;  // eigenbasis, normalized; empty when probability is ~0
};

struct OracleResult {
  std::vector<double> probabilities;  // indexed by Outcome::index()
  std::vector<OracleBranch> branches;
};

namespace oracle_detail {

// Applies M to system register `device` on every (top, aux) block.
inline void apply_to_register(ComplexVector& psi, std::size_t blocks, std::size_t dim, int s, int device,
                              const DenseMatrix& m, const std::vector<bool>& active) {
  const std::size_t sys = int_pow(dim, s);
  std::size_t stride = 1;
  for (int l = s - 1; l > device; --l) stride *= dim;
  ComplexVector column(dim), result(dim);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    if (!active[blk]) continue;
    Complex* base = psi.data() + blk * sys;
    for (std::size_t x = 0; x < sys; ++x) {
      if ((x / stride) % dim != 0) continue;  // x enumerates fibers with the device digit zeroed
      for (std::size_t d = 0; d < dim; ++d) column[d] = base[x + d * stride];
      for (std::size_t r = 0; r < dim; ++r) {
        Complex acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * column[c];
        result[r] = acc;
      }
      for (std::size_t d = 0; d < dim; ++d) base[x + d * stride] = result[d];
    }
  }
}

inline ComplexVector change_basis(const ComplexVector& joint, std::size_t dim, int s, const DenseMatrix& m) {
  ComplexVector out = joint;
  const std::vector<bool> all(1, true);
  for (int l = 0; l < s; ++l) apply_to_register(out, 1, dim, s, l, m, all);
  return out;
}

}  // namespace oracle_detail

inline OracleResult oracle_step(const AmplitudeState& state, std::span<const double> phases, const SpectralModel& model) {
  const int s = state.s;
  const int n = state.n;
  if (s * n + s + 1 > kOracleUnitBudget) throw std::invalid_argument("oracle_step: register exceeds the oracle size guard");
  if (model.dim != state.dim || phases.size() != state.dim) throw std::invalid_argument("oracle_step: shape mismatch");

  const std::size_t dim = state.dim;
  const std::size_t sys = state.size();
  const std::size_t top_dim = s == 1 ? 1 : static_cast<std::size_t>(s);
  const std::size_t aux_dim = std::size_t{1} << s;
  const std::size_t blocks = top_dim * aux_dim;

  // U = V diag(e^{i phi}) V^dagger in the computational basis.
  Eigen::VectorXcd eig(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) eig(static_cast<Eigen::Index>(j)) = std::polar(1.0, phases[j]);
  const DenseMatrix u = model.eigenvectors * eig.asDiagonal() * model.eigenvectors.adjoint();

  const ComplexVector system = oracle_detail::change_basis(state.amplitudes, dim, s, model.eigenvectors);

  // Top qudit and auxiliary qubits in uniform superposition.
  ComplexVector psi(blocks * sys);
  const double amp = 1.0 / std::sqrt(static_cast<double>(blocks));
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    for (std::size_t x = 0; x < sys; ++x) psi[blk * sys + x] = amp * system[x];
  }

  auto aux_bit = [&](std::size_t a, int l) { return (a >> (s - 1 - l)) & 1U; };

  // Controlled evolutions.
  for (int l = 0; l < s; ++l) {
    std::vector<bool> active(blocks);
    for (std::size_t blk = 0; blk < blocks; ++blk) active[blk] = aux_bit(blk % aux_dim, l) == 1U;
    oracle_detail::apply_to_register(psi, blocks, dim, s, l, u, active);
  }

  // Controlled cyclic derangement of the auxiliary qubits.
  if (s > 1) {
    ComplexVector next(psi.size());
    for (std::size_t q = 0; q < top_dim; ++q) {
      for (std::size_t a = 0; a < aux_dim; ++a) {
        std::size_t moved = 0;
        for (int l = 0; l < s; ++l) {
          const int dest = static_cast<int>((static_cast<std::size_t>(l) + q) % static_cast<std::size_t>(s));
          moved |= static_cast<std::size_t>(aux_bit(a, l)) << (s - 1 - dest);
        }
        std::copy_n(psi.begin() + static_cast<std::ptrdiff_t>((q * aux_dim + a) * sys), sys,
                    next.begin() + static_cast<std::ptrdiff_t>((q * aux_dim + moved) * sys));
      }
    }
    psi.swap(next);
  }

  // F^dagger on the top qudit and H on every auxiliary qubit, as one block transform.
  ComplexVector out(psi.size(), 0.0);
  for (std::size_t alpha = 0; alpha < top_dim; ++alpha) {
    for (std::size_t b = 0; b < aux_dim; ++b) {
      Complex* dst = out.data() + (alpha * aux_dim + b) * sys;
      for (std::size_t q = 0; q < top_dim; ++q) {
        const Complex wq = std::polar(1.0 / std::sqrt(static_cast<double>(top_dim)),
                                      -kTwoPi * static_cast<double>((alpha * q) % top_dim) / static_cast<double>(top_dim));
        for (std::size_t a = 0; a < aux_dim; ++a) {
          const int parity = std::popcount(a & b) & 1;
          const Complex w = wq * ((parity ? -1.0 : 1.0) / std::sqrt(static_cast<double>(aux_dim)));
          const Complex* src = psi.data() + (q * aux_dim + a) * sys;
          for (std::size_t x = 0; x < sys; ++x) dst[x] += w * src[x];
        }
      }
    }
  }

  OracleResult result;
  result.probabilities.assign(static_cast<std::size_t>(s) * aux_dim, 0.0);
  const DenseMatrix v_dagger = model.eigenvectors.adjoint();
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const ComplexVector branch(out.begin() + static_cast<std::ptrdiff_t>(blk * sys),
                               out.begin() + static_cast<std::ptrdiff_t>((blk + 1) * sys));
    double p = 0.0;
    for (const auto& a : branch) p += std::norm(a);
    OracleBranch ob;
    ob.outcome = Outcome::from_index(s, blk);
    ob.probability = p;
    result.probabilities[blk] = p;
    if (p > kOracleProbabilityFloor) {
      ob.state.s = s;
      ob.state.n = n;
      ob.state.dim = dim;
      ob.state.amplitudes = oracle_detail::change_basis(branch, dim, s, v_dagger);
      ob.state.normalize();
    }
    result.branches.push_back(std::move(ob));
  }
  return result;
}

}  // namespace distfilter
