#include "hedge/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hedge {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

// Eigenvalues below this are treated as zero for support decisions.
double support_floor(const RealVector& descending) {
  return tolerance::kSupport * std::max(descending[0], 0.0);
}

}  // namespace

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Matrix hermitian_part(const Matrix& m) {
  return 0.5 * (m + m.adjoint());
}

Matrix EigenDecomposition::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

EigenDecomposition eig_hermitian(const Matrix& m) {
  require_square(m, "eig_hermitian");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermiticity_defect(m) > 1e-10 * scale) {
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  }
  // Eigen sorts ascending.
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

// --- DensityMatrix ----------------------------------------------------------

DensityMatrix::DensityMatrix(const Matrix& m) {
  require_square(m, "DensityMatrix");
  if (hermiticity_defect(m) > tolerance::kHermitian) {
    throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
  }
  const Complex tr = m.trace();
  if (std::abs(tr.real() - 1.0) > tolerance::kTrace || std::abs(tr.imag()) > tolerance::kTrace) {
    std::ostringstream os;
    os.precision(17);
    os << "DensityMatrix: trace " << tr.real() << " differs from 1";
    throw std::invalid_argument(os.str());
  }
  m_ = hermitian_part(m);
  const double lo = eig_hermitian(m_).values.minCoeff();
  if (lo < -tolerance::kNegativeEigenvalue) {
    std::ostringstream os;
    os.precision(17);
    os << "DensityMatrix: negative eigenvalue " << lo;
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("maximally_mixed: dim must be positive");
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  const Eigen::VectorXcd v = psi / n;
  return DensityMatrix(v * v.adjoint());
}

double DensityMatrix::purity() const {
  return (m_ * m_).trace().real();
}

RealVector DensityMatrix::eigenvalues() const {
  return eig_hermitian(m_).values;
}

double DensityMatrix::min_eigenvalue() const {
  return eigenvalues().minCoeff();
}

// --- Effect / Povm ----------------------------------------------------------

Effect::Effect(const Matrix& m) {
  require_square(m, "Effect");
  if (hermiticity_defect(m) > tolerance::kHermitian) {
    throw std::invalid_argument("Effect: not Hermitian");
  }
  m_ = hermitian_part(m);
  const RealVector ev = eig_hermitian(m_).values;
  if (ev.minCoeff() < -tolerance::kNegativeEigenvalue ||
      ev.maxCoeff() > 1.0 + tolerance::kNegativeEigenvalue) {
    throw std::invalid_argument("Effect: spectrum outside [0, 1]");
  }
}

Effect Effect::projector(const Eigen::VectorXcd& v) {
  return Effect(v * v.adjoint());
}

Povm::Povm(std::vector<Effect> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw std::invalid_argument("Povm: no effects");
  const Eigen::Index d = effects_.front().dim();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : effects_) {
    require_same_dim(e.dim(), d, "Povm");
    sum += e.matrix();
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tolerance::kPovmSum) {
    throw std::invalid_argument("Povm: effects do not sum to the identity");
  }
}

Povm Povm::from_basis(const Matrix& unitary) {
  require_square(unitary, "Povm::from_basis");
  const Eigen::Index d = unitary.rows();
  if ((unitary.adjoint() * unitary - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("Povm::from_basis: columns are not orthonormal");
  }
  std::vector<Effect> effects;
  effects.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) effects.push_back(Effect::projector(unitary.col(k)));
  return Povm(std::move(effects));
}

Povm Povm::computational_basis(Eigen::Index dim) {
  return from_basis(Matrix::Identity(dim, dim));
}

// --- Bloch parametrisation --------------------------------------------------

double BlochVector::norm() const {
  return std::sqrt(x * x + y * y + z * z);
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

DensityMatrix from_bloch(const BlochVector& b) {
  if (b.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("from_bloch: Bloch vector lies outside the unit ball");
  }
  Matrix m(2, 2);
  m << 0.5 * (1.0 + b.z), 0.5 * Complex(b.x, -b.y), 0.5 * Complex(b.x, b.y), 0.5 * (1.0 - b.z);
  return DensityMatrix(m);
}

BlochVector bloch_coordinates(const Matrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw DimensionMismatch("bloch_coordinates: expected 2x2");
  // Tr[m sigma_x] = m01 + m10, Tr[m sigma_y] = i(m01 - m10), Tr[m sigma_z] = m00 - m11.
  return {(m(0, 1) + m(1, 0)).real(), (Complex(0.0, 1.0) * (m(0, 1) - m(1, 0))).real(),
          (m(0, 0) - m(1, 1)).real()};
}

BlochVector to_bloch(const DensityMatrix& rho) {
  return bloch_coordinates(rho.matrix());
}

// --- Born rule --------------------------------------------------------------

double born_probability(const DensityMatrix& rho, const Effect& e) {
  require_same_dim(rho.dim(), e.dim(), "born_probability");
  // Tr[rho E] = sum_ij rho_ij E_ji
  double p = (rho.matrix().transpose().cwiseProduct(e.matrix())).sum().real();
  if (p < 0.0 && p > -1e-12) p = 0.0;
  if (p > 1.0 && p < 1.0 + 1e-12) p = 1.0;
  return p;
}

std::vector<double> probabilities(const DensityMatrix& rho, const Povm& m) {
  require_same_dim(rho.dim(), m.dim(), "probabilities");
  std::vector<double> out;
  out.reserve(m.size());
  for (const auto& e : m.effects()) out.push_back(born_probability(rho, e));
  return out;
}

// --- Distances --------------------------------------------------------------

double quantum_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho.dim(), sigma.dim(), "quantum_relative_entropy");
  const EigenDecomposition a = eig_hermitian(rho.matrix());
  const EigenDecomposition b = eig_hermitian(sigma.matrix());
  const double rho_floor = support_floor(a.values);
  const double sigma_floor = support_floor(b.values);

  double neg_entropy = 0.0;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    const double l = a.values[i];
    if (l > rho_floor) neg_entropy += l * std::log(l);
  }

  // <b_j| rho |b_j> is the weight rho places on sigma's j-th eigenvector.
  const Matrix rho_in_b = b.vectors.adjoint() * rho.matrix() * b.vectors;
  double cross = 0.0;
  for (Eigen::Index j = 0; j < b.values.size(); ++j) {
    const double w = rho_in_b(j, j).real();
    if (b.values[j] <= sigma_floor) {
      if (w > tolerance::kSupport) return std::numeric_limits<double>::infinity();
      continue;
    }
    cross += w * std::log(b.values[j]);
  }
  return std::max(0.0, neg_entropy - cross);
}

namespace {

Matrix psd_sqrt(const Matrix& m) {
  const EigenDecomposition e = eig_hermitian(m);
  const double floor = support_floor(e.values);
  return spectral_map(e, [floor](double l) { return l > floor ? std::sqrt(l) : 0.0; });
}

}  // namespace

double infidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho.dim(), sigma.dim(), "infidelity");
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of sqrt(rho) sqrt(sigma).
  const Matrix product = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
  Eigen::JacobiSVD<Matrix> svd(product);
  const double root_fidelity = svd.singularValues().sum();
  return std::clamp(1.0 - root_fidelity * root_fidelity, 0.0, 1.0);
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
  require_same_dim(rho.rows(), sigma.rows(), "trace_distance");
  return eig_hermitian(rho - sigma).values.cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return trace_distance(rho.matrix(), sigma.matrix());
}

double hs_distance(const Matrix& rho, const Matrix& sigma) {
  require_same_dim(rho.rows(), sigma.rows(), "hs_distance");
  return (rho - sigma).norm();
}

double hs_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return hs_distance(rho.matrix(), sigma.matrix());
}

RadialCoordinate radial_coordinate(const DensityMatrix& rho) {
  const double purity = rho.purity();
  RadialCoordinate out;
  out.r_sq = 0.5 * (1.0 + purity);
  out.r = std::sqrt(out.r_sq);
  out.bloch_radius = std::sqrt(std::max(0.0, 2.0 * purity - 1.0));
  return out;
}

}  // namespace hedge
