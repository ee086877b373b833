#pragma once

// Density matrices, POVM effects, Born-rule probabilities, Hermitian
// eigendecomposition and the distance measures used to score estimates.
//
// All logarithms are natural; entropies and divergences are in nats.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hedge {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Raised when two operands disagree on Hilbert-space dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

namespace tolerance {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kNegativeEigenvalue = 1e-10;
inline constexpr double kPovmSum = 1e-10;
// Relative to the largest eigenvalue.
inline constexpr double kSupport = 1e-12;
}  // namespace tolerance

/// Largest |A(i,j) - conj(A(j,i))|.
double hermiticity_defect(const Matrix& m);

/// Returns (m + m^dagger)/2.
Matrix hermitian_part(const Matrix& m);

struct EigenDecomposition {
  RealVector values;  // descending
  Matrix vectors;     // column k belongs to values[k]

  Matrix reconstruct() const;
};

/// Spectral decomposition of a Hermitian matrix, eigenvalues sorted
/// descending. Throws std::invalid_argument if `m` is not Hermitian to
/// 1e-10 (scaled by max(1, max |m_ij|)).
EigenDecomposition eig_hermitian(const Matrix& m);

/// f applied to the spectrum: V f(diag) V^dagger.
template <typename Fn>
Matrix spectral_map(const EigenDecomposition& e, Fn&& fn) {
  RealVector mapped(e.values.size());
  for (Eigen::Index k = 0; k < e.values.size(); ++k) mapped[k] = fn(e.values[k]);
  return e.vectors * mapped.asDiagonal() * e.vectors.adjoint();
}

/// A d x d Hermitian, unit-trace, positive-semidefinite operator.
///
/// Construction validates: Hermitian within 1e-12, trace 1 within 1e-12,
/// eigenvalues >= -1e-10. The stored matrix is the Hermitian part of the
/// input so later spectral routines see an exactly self-adjoint operand.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix& m);

  static DensityMatrix maximally_mixed(Eigen::Index dim);
  /// |psi><psi| for a (not necessarily normalized) nonzero vector.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double purity() const;
  RealVector eigenvalues() const;  // descending
  double min_eigenvalue() const;

 private:
  Matrix m_;
};

/// One POVM element: Hermitian with spectrum inside [0, 1] (to 1e-10).
class Effect {
 public:
  explicit Effect(const Matrix& m);

  /// |v><v| for a normalized v.
  static Effect projector(const Eigen::VectorXcd& v);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// An ordered set of effects summing to the identity within 1e-10 entrywise.
class Povm {
 public:
  explicit Povm(std::vector<Effect> effects);

  /// Rank-one projectors onto the columns of a unitary.
  static Povm from_basis(const Matrix& unitary);
  static Povm computational_basis(Eigen::Index dim);

  Eigen::Index dim() const { return effects_.front().dim(); }
  std::size_t size() const { return effects_.size(); }
  const std::vector<Effect>& effects() const { return effects_; }
  const Effect& operator[](std::size_t i) const { return effects_[i]; }

 private:
  std::vector<Effect> effects_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

/// Pauli matrices in the computational basis.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

DensityMatrix from_bloch(const BlochVector& b);
BlochVector to_bloch(const DensityMatrix& rho);
/// Bloch coordinates of any 2x2 matrix: b_a = Re Tr[m sigma_a].
BlochVector bloch_coordinates(const Matrix& m);

/// Tr[rho E], clamped into [0,1] only when within 1e-12 of an endpoint.
double born_probability(const DensityMatrix& rho, const Effect& e);
std::vector<double> probabilities(const DensityMatrix& rho, const Povm& m);

/// D(rho || sigma) = Tr[rho (ln rho - ln sigma)] in nats. Returns +infinity
/// when the support of rho leaves the support of sigma.
double quantum_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/// 1 - (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double infidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Tr|rho - sigma| (no factor 1/2). Accepts any Hermitian operands so that
/// non-physical linear-inversion estimates can still be scored.
double trace_distance(const Matrix& rho, const Matrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Frobenius norm of rho - sigma.
double hs_distance(const Matrix& rho, const Matrix& sigma);
double hs_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

struct RadialCoordinate {
  double r_sq = 0.0;          // (1 + Tr rho^2) / 2
  double r = 0.0;
  double bloch_radius = 0.0;  // sqrt(2 Tr rho^2 - 1), meaningful for d = 2
};

/// The radial coordinate used to organise qubit accuracy curves,
/// r^2 = (1 + Tr rho^2)/2. Note this is not the Bloch radius: the maximally
/// mixed qubit has r^2 = 0.75 but b = 0. Both are returned.
RadialCoordinate radial_coordinate(const DensityMatrix& rho);

}  // namespace hedge
