#pragma once

// Random test inputs built directly from Gaussian draws, independent of the
// samplers under test.

#include <cmath>
#include <random>
#include <vector>

#include "hedge/likelihood.hpp"
#include "hedge/qstate.hpp"

namespace hedge::test {

inline Matrix ginibre(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline Matrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, rng));
  return qr.householderQ();
}

inline Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  const Matrix g = ginibre(d, rng);
  return (g + g.adjoint()) / 2.0;
}

inline Matrix random_traceless(Eigen::Index d, std::mt19937_64& rng) {
  Matrix h = random_hermitian(d, rng);
  h -= (h.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
  return h / h.norm();
}

/// Full-rank state mixed with at least `floor` of I/d.
inline Matrix random_state(Eigen::Index d, std::mt19937_64& rng, double floor = 0.1) {
  const Matrix g = ginibre(d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - floor) * rho + floor * Matrix::Identity(d, d) / static_cast<double>(d);
  return (rho + rho.adjoint()) / 2.0;
}

inline Matrix diag(std::initializer_list<double> xs) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) m(k, k) = x, ++k;
  return m;
}

inline Matrix ket_bra(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Pooled record of several runs of random bases with given counts.
inline MeasurementRecord basis_record(const std::vector<Matrix>& bases,
                                      const std::vector<std::vector<std::uint64_t>>& counts) {
  std::vector<MeasurementRun> runs;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    runs.push_back({Povm::from_basis(bases[j]), counts[j]});
  }
  return pool_measurements(runs);
}

inline Matrix hadamard() {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

/// Columns are the +1 and -1 eigenvectors of sigma_y.
inline Matrix y_basis() {
  Matrix u(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  u << Complex(s, 0), Complex(s, 0), Complex(0, s), Complex(0, -s);
  return u;
}

/// Pauli record with the given +1 counts out of n per axis (x, y, z).
inline MeasurementRecord pauli_record(std::uint64_t n, std::uint64_t px, std::uint64_t py,
                                      std::uint64_t pz) {
  return basis_record({hadamard(), y_basis(), Matrix::Identity(2, 2)},
                      {{px, n - px}, {py, n - py}, {pz, n - pz}});
}

}  // namespace hedge::test
