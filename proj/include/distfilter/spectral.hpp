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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace distfilter {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using DenseMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxQubits = 8;

/// Open-chain Ising model with longitudinal and transverse fields,
///
///   H = coupling * sum_{j<n} Z_j Z_{j+1} + sum_j (field_x X_j + field_z Z_j) + shift * I.
///
/// Qubit 1 is the leftmost tensor factor, i.e. the most significant bit of a
/// computational basis index.
struct HamiltonianSpec {
  int n = 4;
  double coupling = 1.0;
  double field_x = 1.0;
  double field_z = 1.0;
  double shift = 0.0;

  void validate() const {
    if (n < 1) throw std::invalid_argument("hamiltonian: qubit count must be >= 1");
    if (n > kMaxQubits) {
      throw std::invalid_argument("hamiltonian: qubit count " + std::to_string(n) +
                                  " exceeds the dense cap of " + std::to_string(kMaxQubits));
    }
    for (double v : {coupling, field_x, field_z, shift}) {
      if (!std::isfinite(v)) throw std::invalid_argument("hamiltonian: non-finite parameter");
    }
  }
};

inline DenseMatrix build_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  const std::size_t dim = std::size_t{1} << spec.n;
  DenseMatrix h = DenseMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto bit = [&](std::size_t x, int qubit) { return (x >> (spec.n - 1 - qubit)) & 1U; };
  auto zsign = [&](std::size_t x, int qubit) { return bit(x, qubit) ? -1.0 : 1.0; };
  for (std::size_t x = 0; x < dim; ++x) {
    double diag = spec.shift;
    for (int q = 0; q + 1 < spec.n; ++q) diag += spec.coupling * zsign(x, q) * zsign(x, q + 1);
    for (int q = 0; q < spec.n; ++q) {
      diag += spec.field_z * zsign(x, q);
      const std::size_t flipped = x ^ (std::size_t{1} << (spec.n - 1 - q));
      h(static_cast<Eigen::Index>(flipped), static_cast<Eigen::Index>(x)) += spec.field_x;
    }
    h(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) += diag;
  }
  return h;
}

inline double max_hermitian_defect(const DenseMatrix& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

/// Eigendecomposition H = V diag(lambda) V^dagger with ascending eigenvalues.
/// Each eigenvector's largest-magnitude component is real and positive.
struct SpectralModel {
  int n = 0;
  std::size_t dim = 0;
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;

  double min_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < eigenvalues.size(); ++j) {
      gap = std::min(gap, eigenvalues[j] - eigenvalues[j - 1]);
    }
    return gap;
  }

  double orthonormality_defect() const {
    const auto d = static_cast<Eigen::Index>(dim);
    return (eigenvectors.adjoint() * eigenvectors - DenseMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  }

  DenseMatrix reconstruct() const {
    Eigen::VectorXcd lam(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) lam(static_cast<Eigen::Index>(j)) = eigenvalues[j];
    return eigenvectors * lam.asDiagonal() * eigenvectors.adjoint();
  }
};

inline void fix_eigenvector_phases(DenseMatrix& v) {
  for (Eigen::Index col = 0; col < v.cols(); ++col) {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index row = 0; row < v.rows(); ++row) {
      const double mag = std::abs(v(row, col));
      // first index wins near-ties so the choice is stable across runs
      if (mag > best_mag + 1e-12) {
        best_mag = mag;
        best = row;
      }
    }
    const Complex phase = v(best, col) / std::abs(v(best, col));
    v.col(col) *= std::conj(phase);
    v(best, col) = Complex(v(best, col).real(), 0.0);
  }
}

inline SpectralModel decompose(const DenseMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("decompose: matrix must be square and non-empty");
  const auto dim = static_cast<std::size_t>(h.rows());
  if ((dim & (dim - 1)) != 0) throw std::invalid_argument("decompose: dimension must be a power of two");
  if (!h.allFinite()) throw std::invalid_argument("decompose: non-finite matrix entries");
  if (max_hermitian_defect(h) > 1e-10) throw std::invalid_argument("decompose: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: eigensolver did not converge");

  SpectralModel model;
  model.dim = dim;
  model.n = 0;
  while ((std::size_t{1} << model.n) < dim) ++model.n;
  model.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + dim);
  model.eigenvectors = solver.eigenvectors();
  fix_eigenvector_phases(model.eigenvectors);
  return model;
}

enum class InitialKind { plus_product, minus_product, theta_product, eigenstate_index, explicit_amplitudes };

/// Initial single-device state. Explicit amplitudes are given in the
/// computational basis.
struct InitialStateSpec {
  InitialKind kind = InitialKind::plus_product;
  double theta = 0.0;
  std::size_t index = 0;
  ComplexVector amplitudes;

  static InitialStateSpec plus() { return {InitialKind::plus_product, 0.0, 0, {}}; }
  static InitialStateSpec minus() { return {InitialKind::minus_product, 0.0, 0, {}}; }
  static InitialStateSpec product(double theta) { return {InitialKind::theta_product, theta, 0, {}}; }
  static InitialStateSpec eigenstate(std::size_t j) { return {InitialKind::eigenstate_index, 0.0, j, {}}; }
  static InitialStateSpec explicit_state(ComplexVector amps) {
    return {InitialKind::explicit_amplitudes, 0.0, 0, std::move(amps)};
  }
};

/// (cos(theta)|0> + sin(theta)|1>)^{\otimes n} in the computational basis.
inline ComplexVector product_state(int n, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::size_t dim = std::size_t{1} << n;
  ComplexVector psi(dim);
  for (std::size_t x = 0; x < dim; ++x) {
    double amp = 1.0;
    for (int q = 0; q < n; ++q) amp *= ((x >> q) & 1U) ? s : c;
    psi[x] = amp;
  }
  return psi;
}

inline ComplexVector computational_state(const InitialStateSpec& state, int n) {
  switch (state.kind) {
    case InitialKind::plus_product: return product_state(n, M_PI / 4);
    case InitialKind::minus_product: return product_state(n, -M_PI / 4);
    case InitialKind::theta_product: return product_state(n, state.theta);
    case InitialKind::explicit_amplitudes: return state.amplitudes;
    case InitialKind::eigenstate_index: break;
  }
  throw std::logic_error("computational_state: eigenstate input has no fixed computational form");
}

/// Eigenbasis amplitudes c_j = <phi_j|psi>.
inline ComplexVector project_initial(const InitialStateSpec& state, const SpectralModel& model) {
  const std::size_t dim = model.dim;
  if (state.kind == InitialKind::eigenstate_index) {
    if (state.index >= dim) throw std::invalid_argument("project_initial: eigenstate index out of range");
    ComplexVector c(dim, 0.0);
    c[state.index] = 1.0;
    return c;
  }
  if (state.kind == InitialKind::explicit_amplitudes) {
    if (state.amplitudes.size() != dim) throw std::invalid_argument("project_initial: dimension mismatch");
    double norm = 0.0;
    for (const auto& a : state.amplitudes) norm += std::norm(a);
    if (std::abs(norm - 1.0) > 1e-10) throw std::invalid_argument("project_initial: explicit amplitudes are not normalized");
  }
  const ComplexVector psi = computational_state(state, model.n);
  Eigen::Map<const Eigen::VectorXcd> psi_vec(psi.data(), static_cast<Eigen::Index>(dim));
  const Eigen::VectorXcd c = model.eigenvectors.adjoint() * psi_vec;
  return ComplexVector(c.data(), c.data() + dim);
}

inline std::vector<double> populations(const ComplexVector& c) {
  std::vector<double> p(c.size());
  std::transform(c.begin(), c.end(), p.begin(), [](const Complex& a) { return std::norm(a); });
  return p;
}

}  // namespace distfilter
