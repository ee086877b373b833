#include <doctest.h>

#include <cmath>
#include <limits>

#include "hedge/likelihood.hpp"
#include "support.hpp"

using namespace hedge;
using namespace hedge::test;
using doctest::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MeasurementRecord z_record(std::uint64_t n0, std::uint64_t n1) {
  return pool_measurements({{Povm::computational_basis(2), {n0, n1}}});
}

double log_det(const Matrix& rho) {
  return eig_hermitian(rho).values.array().log().sum();
}

}  // namespace

TEST_CASE("hedging parameter") {
  CHECK(HedgingParameter().value() == 0.5);
  CHECK_THROWS_AS(HedgingParameter(0.0), std::invalid_argument);
  CHECK_THROWS_AS(HedgingParameter(-0.1), std::invalid_argument);
  CHECK_THROWS(HedgingParameter(std::nan("")));
}

TEST_CASE("pooling") {
  const auto rec = pauli_record(7, 3, 4, 5);
  REQUIRE(rec.size() == 6);
  CHECK(rec.total() == 21);
  for (const auto& item : rec.items()) CHECK(item.weight == Approx(1.0 / 3));

  const auto single = z_record(2, 3);
  REQUIRE(single.size() == 2);
  for (const auto& item : single.items()) {
    CHECK(item.weight == 1.0);
  }
  CHECK(max_abs(single[0].effect.matrix() - diag({1, 0})) == 0.0);

  const auto two = pool_measurements({{Povm::computational_basis(2), {4, 6}},
                                      {Povm::from_basis(hadamard()), {10, 20}}});
  CHECK(two[0].weight == Approx(0.25));
  CHECK(two[3].weight == Approx(0.75));

  // Zero-shot runs are dropped.
  const auto dropped = pool_measurements({{Povm::computational_basis(2), {0, 0}},
                                          {Povm::from_basis(hadamard()), {1, 2}}});
  CHECK(dropped.size() == 2);
  CHECK(dropped[0].weight == 1.0);

  CHECK_THROWS(pool_measurements({}));
  CHECK_THROWS(pool_measurements({{Povm::computational_basis(2), {0, 0}}}));
  CHECK_THROWS(pool_measurements({{Povm::computational_basis(2), {1, 2, 3}}}));
  CHECK_THROWS(pool_measurements({{Povm::computational_basis(2), {1, 1}},
                                  {Povm::computational_basis(3), {1, 1, 1}}}));
}

TEST_CASE("record validation") {
  std::vector<RecordItem> items{{Effect(diag({1, 0})), 1, 1.0}};
  CHECK_THROWS(MeasurementRecord{items});
  items.push_back({Effect(diag({0, 1})), 2, 1.0});
  CHECK_NOTHROW(MeasurementRecord{items});
  items[1].weight = 0.5;
  CHECK_THROWS(MeasurementRecord{items});
}

TEST_CASE("log-likelihood values") {
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  CHECK(log_likelihood(mixed, z_record(1, 1)) == Approx(2 * std::log(0.5)));
  CHECK(log_likelihood(DensityMatrix(diag({1, 0})), z_record(0, 5)) == -kInf);
  CHECK(log_likelihood(DensityMatrix(diag({1, 0})), z_record(5, 0)) == 0.0);

  const auto empty = pool_measurements({{Povm::computational_basis(2), {0, 0}},
                                        {Povm::from_basis(hadamard()), {0, 1}}});
  CHECK(hedged_log_likelihood(mixed, empty, HedgingParameter(0.5)) ==
        Approx(log_likelihood(mixed, empty) - std::log(2.0)));
  CHECK(hedged_log_likelihood(DensityMatrix(diag({1, 0})), z_record(1, 0), HedgingParameter(0.5)) ==
        -kInf);
}

TEST_CASE("gradient values") {
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  CHECK(max_abs(likelihood_gradient(mixed, z_record(1, 1)) - 2.0 * Matrix::Identity(2, 2)) < 1e-14);
  CHECK(max_abs(hedging_gradient(mixed, HedgingParameter(0.5)) - Matrix::Identity(2, 2)) < 1e-14);
  CHECK(max_abs(hedging_gradient(DensityMatrix(diag({0.8, 0.2})), HedgingParameter(1.0)) -
                diag({1.25, 5})) < 1e-13);
  CHECK_THROWS_AS(likelihood_gradient(DensityMatrix(diag({1, 0})), z_record(0, 1)), std::domain_error);
  CHECK_THROWS_AS(hedging_gradient(DensityMatrix(diag({1, 0})), HedgingParameter(1.0)), std::domain_error);

  std::mt19937_64 rng(4);
  const auto rec = pauli_record(13, 4, 9, 11);
  for (int t = 0; t < 20; ++t) {
    const Matrix rho = random_state(2, rng);
    CHECK(std::abs((likelihood_gradient(rho, rec) * rho).trace().real() - 13.0 * 3) < 1e-10);
  }
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(8);
  const HedgingParameter beta(0.3);
  const double h = 1e-6;
  for (int s = 0; s < 20; ++s) {
    const Eigen::Index d = 2 + s % 3;
    const Matrix rho = random_state(d, rng, 0.3);
    const auto rec = basis_record({random_unitary(d, rng), random_unitary(d, rng)},
                                  {std::vector<std::uint64_t>(d, 3 + s), std::vector<std::uint64_t>(d, 1 + s % 4)});
    const Matrix grad_l = likelihood_gradient(rho, rec);
    const Matrix grad_h = hedging_gradient(rho, beta);
    for (int t = 0; t < 20; ++t) {
      const Matrix dir = random_traceless(d, rng);
      const double fd_l = (log_likelihood(Matrix(rho + h * dir), rec) - log_likelihood(Matrix(rho - h * dir), rec)) / (2 * h);
      const double fd_h =
          beta.value() * (log_det(rho + h * dir) - log_det(rho - h * dir)) / (2 * h);
      const double an_l = (grad_l * dir).trace().real();
      const double an_h = (grad_h * dir).trace().real();
      CHECK(std::abs(fd_l - an_l) <= 1e-5 * std::max(1.0, std::abs(an_l)));
      CHECK(std::abs(fd_h - an_h) <= 1e-5 * std::max(1.0, std::abs(an_h)));
    }
  }
}

TEST_CASE("pooled likelihood differs by a state-independent constant") {
  std::mt19937_64 rng(9);
  const auto rec = pool_measurements({{Povm::computational_basis(3), {4, 1, 2}},
                                      {Povm::from_basis(random_unitary(3, rng)), {10, 0, 13}}});
  double constant = 0.0;
  for (const auto& item : rec.items()) constant += static_cast<double>(item.count) * std::log(item.weight);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho(random_state(3, rng));
    CHECK(std::abs(pooled_log_likelihood(rho, rec) - log_likelihood(rho, rec) - constant) <= 1e-10);
  }
}

TEST_CASE("hedging term peaks at the maximally mixed state") {
  std::mt19937_64 rng(10);
  const double beta = 0.7;
  for (Eigen::Index d = 2; d <= 4; ++d) {
    const double peak = beta * d * std::log(1.0 / static_cast<double>(d));
    CHECK(std::abs(beta * log_det(Matrix::Identity(d, d) / static_cast<double>(d)) - peak) < 1e-12);
    for (int t = 0; t < 50; ++t) CHECK(beta * log_det(random_state(d, rng)) < peak);
  }
}

TEST_CASE("hedged likelihood is concave along segments") {
  std::mt19937_64 rng(12);
  const auto rec = pauli_record(20, 3, 15, 18);
  const HedgingParameter beta(0.1);
  for (int t = 0; t < 200; ++t) {
    const DensityMatrix a(random_state(2, rng, 0.02));
    const DensityMatrix b(random_state(2, rng, 0.02));
    const DensityMatrix mid(Matrix((a.matrix() + b.matrix()) / 2.0));
    const double chord = (hedged_log_likelihood(a, rec, beta) + hedged_log_likelihood(b, rec, beta)) / 2;
    CHECK(hedged_log_likelihood(mid, rec, beta) >= chord - 1e-10);
  }
}
