#include <doctest.h>

#include <cmath>
#include <limits>

#include "hedge/qstate.hpp"
#include "support.hpp"

using namespace hedge;
using namespace hedge::test;
using doctest::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXcd ket(std::initializer_list<Complex> xs) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (auto x : xs) v[k++] = x;
  return v;
}

// Qubit fidelity from Bloch vectors: F = (1 + a.b + sqrt((1-|a|^2)(1-|b|^2)))/2.
double bloch_infidelity(const BlochVector& a, const BlochVector& b) {
  const double dot = a.x * b.x + a.y * b.y + a.z * b.z;
  const double root = std::sqrt(std::max(0.0, (1 - a.norm() * a.norm()) * (1 - b.norm() * b.norm())));
  return 1.0 - 0.5 * (1.0 + dot + root);
}

BlochVector random_bloch(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  BlochVector b{g(rng), g(rng), g(rng)};
  const double scale = std::cbrt(u(rng)) / b.norm();
  return {b.x * scale, b.y * scale, b.z * scale};
}

}  // namespace

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix(diag({0.3, 0.7})));
  CHECK_THROWS_AS(DensityMatrix(diag({0.3, 0.8})), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix(diag({1.2, -0.2})), std::invalid_argument);
  Matrix skew = diag({0.5, 0.5});
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{skew}, std::invalid_argument);
  // Tiny negative eigenvalues from rounding are accepted.
  CHECK_NOTHROW(DensityMatrix(diag({1.0 + 5e-11, -5e-11})));
  CHECK_THROWS_AS(DensityMatrix(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("born probabilities") {
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  const Effect up = Effect::projector(ket({1, 0}));
  CHECK(born_probability(mixed, up) == Approx(0.5));
  CHECK(born_probability(DensityMatrix::pure(ket({1, 0})), up) == 1.0);
  const DensityMatrix z06 = from_bloch({0, 0, 0.6});
  CHECK(born_probability(z06, Effect((Matrix::Identity(2, 2) + pauli_z()) / 2.0)) == Approx(0.8));

  const Povm z = Povm::computational_basis(2);
  auto p = probabilities(mixed, z);
  CHECK(p[0] == Approx(0.5));
  CHECK(p[1] == Approx(0.5));
  p = probabilities(from_bloch({1, 0, 0}), z);
  CHECK(p[0] == Approx(0.5));
  p = probabilities(z06, z);
  CHECK(p[0] == Approx(0.8));
  CHECK(p[1] == Approx(0.2));

  CHECK_THROWS_AS(born_probability(DensityMatrix::maximally_mixed(3), up), DimensionMismatch);
}

TEST_CASE("probabilities are normalized for random states and POVMs") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index d = 2 + t % 4;
    const DensityMatrix rho(random_state(d, rng, 0.0));
    const auto p = probabilities(rho, Povm::from_basis(random_unitary(d, rng)));
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
}

TEST_CASE("povm validation") {
  CHECK_THROWS_AS(Povm({Effect(diag({1, 0}))}), std::invalid_argument);
  CHECK_THROWS_AS(Effect(diag({1.5, 0})), std::invalid_argument);
  CHECK_THROWS_AS(Effect(diag({-0.5, 0})), std::invalid_argument);
  CHECK_NOTHROW(Povm({Effect(diag({0.5, 0.5})), Effect(diag({0.5, 0.5}))}));
}

TEST_CASE("hermitian eigendecomposition") {
  auto e = eig_hermitian(diag({0.2, 0.8}));
  CHECK(e.values[0] == Approx(0.8));
  CHECK(e.values[1] == Approx(0.2));

  e = eig_hermitian((Matrix::Identity(2, 2) + pauli_x()) / 2.0);
  CHECK(e.values[0] == Approx(1.0));
  CHECK(std::abs(e.values[1]) < 1e-15);
  const Eigen::VectorXcd v = e.vectors.col(0);
  CHECK(std::abs(std::abs(v[0]) - 1 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(v[0] - v[1]) < 1e-12);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Matrix h = random_hermitian(4, rng);
    const auto eig = eig_hermitian(h);
    CHECK(max_abs(eig.reconstruct() - h) <= 1e-10);
    for (Eigen::Index k = 1; k < 4; ++k) CHECK(eig.values[k - 1] >= eig.values[k]);
  }
  Matrix bad = diag({1, 2});
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eig_hermitian(bad), std::invalid_argument);
}

TEST_CASE("relative entropy") {
  std::mt19937_64 rng(3);
  const DensityMatrix rho(random_state(3, rng));
  CHECK(std::abs(quantum_relative_entropy(rho, rho)) < 1e-12);

  const DensityMatrix zero = DensityMatrix::pure(ket({1, 0}));
  const DensityMatrix one = DensityMatrix::pure(ket({0, 1}));
  CHECK(quantum_relative_entropy(zero, one) == kInf);
  // Support of sigma covers rho: finite even though rho is pure.
  CHECK(std::isfinite(quantum_relative_entropy(zero, DensityMatrix::maximally_mixed(2))));

  const double expected = 0.8 * std::log(1.6) + 0.2 * std::log(0.4);
  CHECK(quantum_relative_entropy(DensityMatrix(diag({0.8, 0.2})),
                                 DensityMatrix::maximally_mixed(2)) == Approx(expected).epsilon(1e-12));
  CHECK(expected == Approx(0.19274).epsilon(1e-4));
}

TEST_CASE("relative entropy of commuting states equals classical KL") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const Matrix v = random_unitary(d, rng);
    RealVector p(d), q(d);
    for (Eigen::Index k = 0; k < d; ++k) p[k] = u(rng), q[k] = u(rng);
    p /= p.sum();
    q /= q.sum();
    double kl = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) kl += p[k] * std::log(p[k] / q[k]);
    const DensityMatrix rho(Matrix(v * p.cast<Complex>().asDiagonal() * v.adjoint()));
    const DensityMatrix sigma(Matrix(v * q.cast<Complex>().asDiagonal() * v.adjoint()));
    CHECK(std::abs(quantum_relative_entropy(rho, sigma) - kl) <= 1e-10);
  }
}

TEST_CASE("Klein inequality on random pairs") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const DensityMatrix a(random_state(d, rng, 0.01));
    const DensityMatrix b(random_state(d, rng, 0.01));
    const double kl = quantum_relative_entropy(a, b);
    CHECK(kl >= 0.0);
    if (hs_distance(a, b) > 1e-6) CHECK(kl > 0.0);
  }
}

TEST_CASE("relative entropy is continuous across degenerate spectra") {
  // Eigenvectors inside a degenerate eigenspace are arbitrary; the result
  // must not depend on them.
  std::mt19937_64 rng(29);
  const DensityMatrix rho(random_state(3, rng));
  const Matrix v = random_unitary(3, rng);
  const Matrix degenerate = v * diag({0.4, 0.4, 0.2}) * v.adjoint();
  const double base = quantum_relative_entropy(rho, DensityMatrix(degenerate));
  for (int t = 0; t < 10; ++t) {
    Matrix nudged = degenerate + 1e-11 * random_traceless(3, rng);
    nudged = hermitian_part(nudged);
    CHECK(std::abs(quantum_relative_entropy(rho, DensityMatrix(nudged)) - base) < 1e-9);
    CHECK(std::abs(infidelity(rho, DensityMatrix(nudged)) - infidelity(rho, DensityMatrix(degenerate))) < 1e-9);
  }
}

TEST_CASE("infidelity") {
  std::mt19937_64 rng(31);
  const DensityMatrix rho(random_state(3, rng));
  CHECK(std::abs(infidelity(rho, rho)) < 1e-10);
  CHECK(infidelity(DensityMatrix::pure(ket({1, 0})), DensityMatrix::pure(ket({0, 1}))) ==
        Approx(1.0));
  CHECK(infidelity(DensityMatrix::maximally_mixed(2), DensityMatrix::pure(ket({1, 0}))) ==
        Approx(0.5));

  for (int t = 0; t < 200; ++t) {
    const BlochVector a = random_bloch(rng);
    const BlochVector b = random_bloch(rng);
    const double expected = bloch_infidelity(a, b);
    const double got = infidelity(from_bloch(a), from_bloch(b));
    CHECK(std::abs(got - expected) < 1e-10);
    CHECK(std::abs(got - infidelity(from_bloch(b), from_bloch(a))) < 1e-10);
  }
}

TEST_CASE("trace and Hilbert-Schmidt distances") {
  const DensityMatrix zero = DensityMatrix::pure(ket({1, 0}));
  const DensityMatrix one = DensityMatrix::pure(ket({0, 1}));
  CHECK(trace_distance(zero, zero) == 0.0);
  CHECK(hs_distance(zero, zero) == 0.0);
  CHECK(trace_distance(zero, one) == Approx(2.0));
  CHECK(hs_distance(zero, one) == Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(37);
  for (int t = 0; t < 1000; ++t) {
    const BlochVector a = random_bloch(rng);
    const BlochVector b = random_bloch(rng);
    const double dist = std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
    const double tr = trace_distance(from_bloch(a), from_bloch(b));
    const double hs = hs_distance(from_bloch(a), from_bloch(b));
    CHECK(std::abs(tr - std::sqrt(2.0) * hs) <= 1e-12);
    CHECK(std::abs(tr - dist) <= 1e-12);
  }
}

TEST_CASE("radial coordinate") {
  auto r = radial_coordinate(DensityMatrix::pure(ket({1, 0})));
  CHECK(r.r_sq == Approx(1.0));
  CHECK(r.bloch_radius == Approx(1.0));
  r = radial_coordinate(DensityMatrix::maximally_mixed(2));
  CHECK(r.r_sq == Approx(0.75));
  CHECK(r.r == Approx(std::sqrt(0.75)));
  CHECK(r.bloch_radius == Approx(0.0));
  r = radial_coordinate(from_bloch({0, 0, 0.6}));
  CHECK(r.r_sq == Approx(0.84));
  CHECK(r.bloch_radius == Approx(0.6));
}

TEST_CASE("Bloch conversions") {
  CHECK(max_abs(from_bloch({0, 0, 0}).matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-15);
  CHECK(max_abs(from_bloch({0, 0, 1}).matrix() - diag({1, 0})) < 1e-15);
  const double s = 1 / std::sqrt(3.0);
  const auto ev = from_bloch({s, s, s}).eigenvalues();
  CHECK(ev[0] == Approx(1.0));
  CHECK(std::abs(ev[1]) < 1e-12);
  CHECK_THROWS_AS(from_bloch({1, 1, 0}), std::invalid_argument);

  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    const BlochVector b = random_bloch(rng);
    const DensityMatrix rho = from_bloch(b);
    const BlochVector back = to_bloch(rho);
    CHECK(std::abs(back.x - b.x) <= 1e-12);
    CHECK(std::abs(back.y - b.y) <= 1e-12);
    CHECK(std::abs(back.z - b.z) <= 1e-12);
    CHECK(std::abs(rho.purity() - (1 + b.norm() * b.norm()) / 2) <= 1e-12);
  }
}
