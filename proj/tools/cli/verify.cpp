#include "cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include "hedge/classical.hpp"
#include "hedge/montecarlo.hpp"

namespace hedge::cli {

namespace {

// Stream ids passed as the "state" argument of trial_seed, one per check.
enum Stream : std::uint64_t { kRatio = 1, kClosedForm = 2, kGradient = 3, kNorm = 4 };

Matrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) q.col(k) *= std::polar(1.0, std::arg(r(k, k)));
  return q;
}

// Full-rank state with spectrum bounded away from zero.
Matrix random_interior_state(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.8 * rho + 0.2 * Matrix::Identity(d, d) / static_cast<double>(d);
  return hermitian_part(rho);
}

Matrix random_traceless_direction(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix h(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) h(i, j) = Complex(gauss(rng), gauss(rng));
  }
  h = hermitian_part(h);
  h -= (h.trace().real() / static_cast<double>(d)) * Matrix::Identity(d, d);
  return h / h.norm();
}

// Two random bases, 50 shots each, pooled.
MeasurementRecord random_record(Eigen::Index d, std::mt19937_64& rng) {
  std::vector<MeasurementRun> runs;
  std::uniform_int_distribution<std::uint64_t> count(1, 20);
  for (int b = 0; b < 2; ++b) {
    MeasurementRun run{Povm::from_basis(random_unitary(d, rng)), {}};
    for (Eigen::Index k = 0; k < d; ++k) run.counts.push_back(count(rng));
    runs.push_back(std::move(run));
  }
  return pool_measurements(runs);
}

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

CheckResult likelihood_ratio_and_rank(const VerifyOptions& opt, CheckResult& rank) {
  CheckResult ratio{"likelihood_ratio", 0, 0, std::numeric_limits<double>::infinity(), "min ratio/bound", {}};
  rank = CheckResult{"rank_deficiency", 0, 0, 0.0, "max MLE min eigenvalue when tomography < -1e-6", {}};
  const HedgingParameter beta(opt.beta);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = mc::trial_seed(opt.seed, kRatio, t);
    std::mt19937_64 rng(seed);
    const DensityMatrix truth = mc::sample_hs_state(rng);
    const MeasurementRecord rec = mc::simulate_pauli_data(truth, opt.shots_per_basis, rng);
    const Estimate m = mle(rec, opt.solver);
    const Estimate h = hmle(rec, beta, opt.solver);
    ++ratio.cases;
    if (!m.diagnostics.converged || !h.diagnostics.converged) {
      ++ratio.unconverged;
      ratio.failures.push_back({t, seed, 0.0, "solver did not converge"});
      continue;
    }
    const LikelihoodRatioCheck c = verify_likelihood_ratio(rec, beta, m.state, h.state);
    if (c.indeterminate) {
      ratio.failures.push_back({t, seed, 0.0, "indeterminate ratio"});
    } else {
      ratio.worst = std::min(ratio.worst, c.ratio / c.bound);
      if (!c.holds) {
        ratio.failures.push_back({t, seed, c.ratio, "ratio " + describe(c.ratio) + " below bound " + describe(c.bound)});
      } else if (c.ratio > 1.0 + 1e-6) {
        ratio.failures.push_back({t, seed, c.ratio, "hedged likelihood exceeds MLE: ratio " + describe(c.ratio)});
      }
    }

    const double tomo_min = linear_inversion(rec).min_eigenvalue();
    if (tomo_min < -1e-6) {
      ++rank.cases;
      rank.worst = std::max(rank.worst, m.diagnostics.min_eigenvalue);
      if (m.diagnostics.min_eigenvalue > 1e-6) {
        rank.failures.push_back({t, seed, m.diagnostics.min_eigenvalue,
                                 "tomography min eigenvalue " + describe(tomo_min) +
                                     " but MLE min eigenvalue " + describe(m.diagnostics.min_eigenvalue)});
      }
    }
  }
  return ratio;
}

CheckResult closed_form(const VerifyOptions& opt) {
  CheckResult out{"closed_form", 0, 0, 0.0, "max hs distance", {}};
  const std::size_t cases = std::max<std::size_t>(opt.trials / 10, 1);
  const double betas[] = {0.1, 0.5, 1.0};
  for (std::size_t t = 0; t < cases; ++t) {
    const std::uint64_t seed = mc::trial_seed(opt.seed, kClosedForm, t);
    std::mt19937_64 rng(seed);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(t % 3);
    const HedgingParameter beta(betas[(t / 3) % 3]);
    const Matrix basis = random_unitary(d, rng);
    std::uniform_int_distribution<std::uint64_t> count(0, 30);
    std::vector<std::uint64_t> counts;
    for (Eigen::Index k = 0; k < d; ++k) counts.push_back(count(rng));
    if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; })) counts[0] = 1;
    const Povm povm = Povm::from_basis(basis);
    const MeasurementRecord rec = pool_measurements({MeasurementRun{povm, counts}});
    const Estimate h = hmle(rec, beta, opt.solver);
    ++out.cases;
    if (!h.diagnostics.converged) {
      ++out.unconverged;
      out.failures.push_back({t, seed, 0.0, "solver did not converge"});
      continue;
    }
    const DensityMatrix exact =
        projective_hmle_closed_form(classical::CountVector(counts), basis, beta);
    const double dist = hs_distance(h.state, exact);
    out.worst = std::max(out.worst, dist);
    if (!(dist <= 1e-8)) {
      out.failures.push_back({t, seed, dist, "hs distance " + describe(dist)});
    }
  }
  return out;
}

CheckResult gradients(const VerifyOptions& opt) {
  CheckResult out{"gradients", 0, 0, 0.0, "max relative error", {}};
  constexpr double h = 1e-6;
  const HedgingParameter beta(opt.beta);
  constexpr std::size_t kStates = 20;
  constexpr std::size_t kDirections = 20;
  for (std::size_t s = 0; s < kStates; ++s) {
    const std::uint64_t seed = mc::trial_seed(opt.seed, kGradient, s);
    std::mt19937_64 rng(seed);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 3);
    const Matrix rho = random_interior_state(d, rng);
    const MeasurementRecord rec = random_record(d, rng);
    const Matrix grad_l = likelihood_gradient(rho, rec);
    const Matrix grad_h = hedging_gradient(rho, beta);
    auto log_det = [](const Matrix& m) { return eig_hermitian(m).values.array().log().sum(); };
    for (std::size_t k = 0; k < kDirections; ++k) {
      const Matrix dir = random_traceless_direction(d, rng);
      const double fd_l =
          (log_likelihood(Matrix(rho + h * dir), rec) - log_likelihood(Matrix(rho - h * dir), rec)) /
          (2.0 * h);
      const double fd_h =
          beta.value() * (log_det(rho + h * dir) - log_det(rho - h * dir)) / (2.0 * h);
      const double an_l = (grad_l * dir).trace().real();
      const double an_h = (grad_h * dir).trace().real();
      for (const auto& [fd, an, what] : {std::tuple{fd_l, an_l, "likelihood"},
                                         std::tuple{fd_h, an_h, "hedging"}}) {
        ++out.cases;
        const double rel = std::abs(fd - an) / std::max(std::abs(fd), 1e-8);
        out.worst = std::max(out.worst, rel);
        if (!(rel <= 1e-5)) {
          out.failures.push_back({s * kDirections + k, seed, rel,
                                  std::string(what) + " gradient relative error " + describe(rel)});
        }
      }
    }
  }
  return out;
}

CheckResult norm_equivalence(const VerifyOptions& opt) {
  CheckResult out{"norm_equivalence", 0, 0, 0.0, "max |trace - sqrt2 hs|", {}};
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = mc::trial_seed(opt.seed, kNorm, t);
    std::mt19937_64 rng(seed);
    const DensityMatrix a = mc::sample_hs_state(rng);
    const DensityMatrix b = mc::sample_hs_state(rng);
    const double diff = std::abs(trace_distance(a, b) - std::sqrt(2.0) * hs_distance(a, b));
    ++out.cases;
    out.worst = std::max(out.worst, diff);
    if (!(diff <= 1e-12)) out.failures.push_back({t, seed, diff, "difference " + describe(diff)});
  }
  return out;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

bool VerifyReport::any_unconverged() const {
  return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.unconverged > 0; });
}

VerifyReport run_verification(const VerifyOptions& opt) {
  VerifyReport report;
  CheckResult rank;
  report.checks.push_back(likelihood_ratio_and_rank(opt, rank));
  report.checks.push_back(std::move(rank));
  report.checks.push_back(closed_form(opt));
  report.checks.push_back(gradients(opt));
  report.checks.push_back(norm_equivalence(opt));
  return report;
}

}  // namespace hedge::cli
