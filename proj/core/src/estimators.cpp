#include "hedge/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace hedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double trace_product(const Matrix& a, const Matrix& b) {
  return a.transpose().cwiseProduct(b).sum().real();
}

struct Observation {
  Matrix effect;
  double count;
};

// Real design matrix A_ia = Tr[B_a E_i] over the traceless basis.
Eigen::MatrixXd design_matrix(const std::vector<const Matrix*>& effects,
                              const std::vector<Matrix>& basis) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(effects.size()),
                    static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < effects.size(); ++i) {
    for (std::size_t k = 0; k < basis.size(); ++k) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          trace_product(basis[k], *effects[i]);
    }
  }
  return a;
}

Matrix combine(const std::vector<Matrix>& basis, const Eigen::VectorXd& coeffs) {
  Matrix m = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k) m += coeffs[static_cast<Eigen::Index>(k)] * basis[k];
  return m;
}

std::vector<Eigen::VectorXd> null_vectors(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  std::vector<Eigen::VectorXd> out;
  if (a.rows() == 0) {
    for (Eigen::Index k = 0; k < n; ++k) out.push_back(Eigen::VectorXd::Unit(n, k));
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double threshold = 1e-10 * (s.size() > 0 ? s[0] : 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k >= s.size() || s[k] <= threshold) out.push_back(svd.matrixV().col(k));
  }
  return out;
}

// Diluted multiplicative ascent on the density-matrix manifold:
//   rho <- A rho A^dagger / Tr[...],  A = I + (t / c) (G - c I),
// where G is the objective gradient and c = Tr[G rho] is constant on the
// feasible set (N for the likelihood, N + d beta with hedging). t = 1 is the
// undiluted R rho R step; smaller t guarantees ascent. The step t is halved
// on failure and doubled (up to max_step) after success.
class Ascent {
 public:
  Ascent(const MeasurementRecord& rec, std::optional<double> beta, const SolverConfig& cfg)
      : cfg_(cfg), beta_(beta), dim_(rec.dim()) {
    for (const auto& item : rec.items()) {
      if (item.count == 0) continue;
      observed_.push_back({item.effect.matrix(), static_cast<double>(item.count)});
      n_ += static_cast<double>(item.count);
    }
    c_ = n_ + (beta_ ? *beta_ * static_cast<double>(dim_) : 0.0);
    scale_ = std::max(n_, 1.0);
  }

  Estimate run() {
    SolverDiagnostics diag;
    Matrix rho = Matrix::Identity(dim_, dim_) / static_cast<double>(dim_);
    RealVector spectrum = RealVector::Constant(dim_, 1.0 / static_cast<double>(dim_));
    Matrix vectors = Matrix::Identity(dim_, dim_);
    double f = objective(rho, spectrum);
    if (!std::isfinite(f)) {
      throw std::invalid_argument("solver: observed outcome has zero probability for every state");
    }
    if (cfg_.keep_trace) diag.objective_trace.push_back(f);

    double step = cfg_.initial_step;
    double last_delta = kInf;
    const Matrix identity = Matrix::Identity(dim_, dim_);
    int iter = 0;
    bool stalled = false;
    for (; iter < cfg_.max_iter; ++iter) {
      const Matrix g = gradient(rho, spectrum, vectors);
      const Matrix g_tilde = g - c_ * identity;
      diag.stationarity = stationarity(g_tilde, rho);
      diag.duality_gap = largest_eigenvalue(g) - c_;
      if (converged(diag, last_delta)) {
        diag.converged = true;
        break;
      }

      bool accepted = false;
      while (step >= kMinStep) {
        const Matrix a = identity + (step / c_) * g_tilde;
        Matrix cand = a * rho * a.adjoint();
        cand = hermitian_part(cand);
        cand /= cand.trace().real();
        RealVector cand_spectrum;
        Matrix cand_vectors;
        if (beta_) {
          Eigen::SelfAdjointEigenSolver<Matrix> es(cand);
          cand_spectrum = es.eigenvalues();
          cand_vectors = es.eigenvectors();
          if (!(cand_spectrum.minCoeff() >= cfg_.min_eigenvalue_floor)) {
            step *= 0.5;
            continue;
          }
        }
        const double fc = objective(cand, cand_spectrum);
        if (std::isfinite(fc) && fc >= f) {
          last_delta = fc - f;
          f = fc;
          rho = std::move(cand);
          spectrum = std::move(cand_spectrum);
          vectors = std::move(cand_vectors);
          if (cfg_.keep_trace) diag.objective_trace.push_back(f);
          step = std::min(2.0 * step, cfg_.max_step);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // No representable ascent step remains: accept if stationary enough.
        stalled = true;
        break;
      }
    }

    if (stalled || iter == cfg_.max_iter) {
      const Matrix g = gradient(rho, spectrum, vectors);
      diag.stationarity = stationarity(g - c_ * identity, rho);
      diag.duality_gap = largest_eigenvalue(g) - c_;
      diag.converged = stalled && diag.stationarity <= cfg_.stationarity_tol * scale_;
    }
    diag.iterations = iter;
    diag.final_objective = f;
    DensityMatrix state(rho);
    diag.min_eigenvalue = state.min_eigenvalue();
    return Estimate{std::move(state), std::move(diag)};
  }

 private:
  static constexpr double kMinStep = 1e-16;

  bool converged(const SolverDiagnostics& diag, double last_delta) const {
    if (diag.stationarity > cfg_.stationarity_tol * scale_) return false;
    if (diag.duality_gap > cfg_.gap_tol * scale_) return false;
    return last_delta <= cfg_.tol || diag.duality_gap <= cfg_.tol;
  }

  // `spectrum` is only consulted for the hedged objective.
  double objective(const Matrix& rho, const RealVector& spectrum) const {
    double value = 0.0;
    for (const auto& o : observed_) {
      const double p = trace_product(rho, o.effect);
      if (p < kZeroProbability) return -kInf;
      value += o.count * std::log(p);
    }
    if (beta_) {
      double log_det = 0.0;
      for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
        if (!(spectrum[k] > 0.0)) return -kInf;
        log_det += std::log(spectrum[k]);
      }
      value += *beta_ * log_det;
    }
    return value;
  }

  Matrix gradient(const Matrix& rho, const RealVector& spectrum, const Matrix& vectors) const {
    Matrix g = Matrix::Zero(dim_, dim_);
    for (const auto& o : observed_) {
      g += (o.count / trace_product(rho, o.effect)) * o.effect;
    }
    if (beta_) {
      g += vectors * (*beta_ * spectrum.cwiseInverse()).cast<Complex>().asDiagonal() *
           vectors.adjoint();
    }
    return g;
  }

  double stationarity(const Matrix& g_tilde, const Matrix& rho) const {
    // The hedged optimum is interior, so the full projected gradient vanishes
    // there. The plain likelihood may peak on the boundary, where only its
    // action on the support of rho has to vanish.
    return beta_ ? g_tilde.norm() : (g_tilde * rho).norm();
  }

  static double largest_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }

  const SolverConfig& cfg_;
  std::optional<double> beta_;
  Eigen::Index dim_;
  std::vector<Observation> observed_;
  double n_ = 0.0;
  double c_ = 0.0;
  double scale_ = 1.0;
};

// Damped Newton ascent over rho(x) = I/d + sum_a x_a B_a with an orthonormal
// traceless basis B. Outcome probabilities are affine in x, so the likelihood
// Hessian is -A^T diag(n / p^2) A. The hedged objective is maximized directly.
// The plain likelihood is followed along the maximizers of l + mu ln det rho
// as mu shrinks; at each such point lambda_max(R) - N <= d mu.
class Newton {
 public:
  Newton(const MeasurementRecord& rec, const SolverConfig& cfg)
      : cfg_(cfg), dim_(rec.dim()), basis_(traceless_hermitian_basis(rec.dim())) {
    std::vector<const Matrix*> observed;
    std::vector<double> offsets;
    std::vector<double> counts;
    for (const auto& item : rec.items()) {
      if (item.count == 0) continue;
      observed.push_back(&item.effect.matrix());
      effects_.push_back(item.effect.matrix());
      offsets.push_back(item.effect.matrix().trace().real() / static_cast<double>(dim_));
      counts.push_back(static_cast<double>(item.count));
      n_ += static_cast<double>(item.count);
    }
    a_ = design_matrix(observed, basis_);
    offset_ = Eigen::Map<const Eigen::VectorXd>(offsets.data(), static_cast<Eigen::Index>(offsets.size()));
    counts_ = Eigen::Map<const Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(counts.size()));
    scale_ = std::max(n_, 1.0);
  }

  Estimate hedged(double beta) {
    SolverDiagnostics diag;
    Point pt = start();
    if (cfg_.keep_trace) diag.objective_trace.push_back(pt.loglik + beta * pt.logdet);
    int iterations = 0;
    const Status status = centre(pt, beta, cfg_.min_eigenvalue_floor, true, iterations,
                                 cfg_.keep_trace ? &diag.objective_trace : nullptr);
    return finish(pt, beta, status, iterations, std::move(diag));
  }

  Estimate plain() {
    SolverDiagnostics diag;
    Point pt = start();
    if (cfg_.keep_trace) diag.objective_trace.push_back(pt.loglik);
    int iterations = 0;
    const double mu_min = cfg_.barrier_floor * scale_;
    Status status = Status::converged;
    for (double mu = scale_;; mu = std::max(mu * kBarrierShrink, mu_min)) {
      status = centre(pt, mu, 0.0, false, iterations, nullptr);
      if (cfg_.keep_trace) diag.objective_trace.push_back(pt.loglik);
      if (status == Status::exhausted || mu == mu_min) break;
    }
    return finish(pt, std::nullopt, status, iterations, std::move(diag));
  }

 private:
  static constexpr double kBarrierShrink = 0.05;
  static constexpr double kMinStep = 1e-14;
  static constexpr double kArmijo = 1e-4;
  static constexpr int kMaxFlatSteps = 4;

  enum class Status { converged, stalled, exhausted };

  struct Point {
    Eigen::VectorXd x;
    Eigen::VectorXd p;
    RealVector spectrum;
    Matrix vectors;
    double loglik = 0.0;
    double logdet = 0.0;
  };

  Point start() const {
    Point pt;
    if (!evaluate(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size())), 0.0, pt)) {
      throw std::invalid_argument("solver: observed outcome has zero probability for every state");
    }
    return pt;
  }

  Matrix state(const Eigen::VectorXd& x) const {
    Matrix rho = Matrix::Identity(dim_, dim_) / static_cast<double>(dim_);
    if (!basis_.empty()) rho += combine(basis_, x);
    return hermitian_part(rho);
  }

  // False if an observed outcome has (near) zero probability or the smallest
  // eigenvalue is not above `floor`.
  bool evaluate(const Eigen::VectorXd& x, double floor, Point& out) const {
    Eigen::VectorXd p = offset_ + a_ * x;
    if (p.size() > 0 && !(p.minCoeff() >= kZeroProbability)) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(state(x));
    const RealVector& lambda = es.eigenvalues();
    if (!(lambda.minCoeff() > floor)) return false;
    out.x = x;
    out.loglik = counts_.dot(p.array().log().matrix());
    out.logdet = lambda.array().log().sum();
    out.p = std::move(p);
    out.spectrum = lambda;
    out.vectors = es.eigenvectors();
    return true;
  }

  // f(to) - f(from) for f = l + mu ln det, formed from ratios so that gains
  // far below the size of f are still resolved.
  double increase(const Point& from, const Point& to, double mu) const {
    double gain = 0.0;
    for (Eigen::Index i = 0; i < counts_.size(); ++i) {
      gain += counts_[i] * std::log1p((to.p[i] - from.p[i]) / from.p[i]);
    }
    if (mu > 0.0) {
      for (Eigen::Index k = 0; k < from.spectrum.size(); ++k) {
        gain += mu * std::log(to.spectrum[k] / from.spectrum[k]);
      }
    }
    return gain;
  }

  // Maximizes l + mu ln det from `pt`. Each accepted step is an ascent step
  // of that objective.
  Status centre(Point& pt, double mu, double floor, bool gradient_test, int& iterations,
                std::vector<double>* trace) const {
    const auto k = static_cast<Eigen::Index>(basis_.size());
    if (k == 0) return Status::converged;
    int flat_steps = 0;
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (n_ + mu * static_cast<double>(dim_) + 1.0);
    while (iterations < cfg_.max_iter) {
      const Eigen::VectorXd weights = counts_.cwiseQuotient(pt.p);
      Eigen::VectorXd grad = a_.transpose() * weights;
      Eigen::MatrixXd neg_hess =
          a_.transpose() * weights.cwiseQuotient(pt.p).asDiagonal() * a_;

      // ln det terms in the eigenbasis of rho: M_a = V^dag B_a V.
      const RealVector inv_sqrt = pt.spectrum.cwiseSqrt().cwiseInverse();
      std::vector<Matrix> scaled(static_cast<std::size_t>(k));
      for (Eigen::Index a = 0; a < k; ++a) {
        Matrix m = pt.vectors.adjoint() * basis_[static_cast<std::size_t>(a)] * pt.vectors;
        grad[a] += mu * (m.diagonal().real().cwiseProduct(pt.spectrum.cwiseInverse())).sum();
        scaled[static_cast<std::size_t>(a)] =
            inv_sqrt.cast<Complex>().asDiagonal() * m * inv_sqrt.cast<Complex>().asDiagonal();
      }
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
          const double h = mu * scaled[static_cast<std::size_t>(a)]
                                    .cwiseProduct(scaled[static_cast<std::size_t>(b)].conjugate())
                                    .sum()
                                    .real();
          neg_hess(a, b) += h;
          if (a != b) neg_hess(b, a) += h;
        }
      }

      const Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
      const Eigen::VectorXd dx = ldlt.solve(grad);
      const double decrement_sq = grad.dot(dx);
      if (!std::isfinite(decrement_sq)) return Status::stalled;
      // Where the curvature is large a small decrement still allows a
      // sizeable gradient, which bounds the duality gap. Barrier stages skip
      // that test: their gradient carries mu / lambda_min rounding noise.
      const bool done = decrement_sq <= 2.0 * cfg_.tol &&
                        (!gradient_test || grad.norm() <= 0.5 * cfg_.gap_tol * scale_);

      Point next;
      bool accepted = false;
      double gain = 0.0;
      for (double t = 1.0; t >= kMinStep; t *= 0.5) {
        if (!evaluate(pt.x + t * dx, floor, next)) continue;
        gain = increase(pt, next, mu);
        // Armijo test, relaxed by rounding: near the optimum the expected
        // gain falls below what f can resolve.
        if (gain >= kArmijo * t * decrement_sq - slack) {
          accepted = true;
          break;
        }
      }
      if (accepted) {
        ++iterations;
        pt = std::move(next);
        if (trace) trace->push_back(pt.loglik + mu * pt.logdet);
      }
      if (done) return Status::converged;
      // Steps that do not raise f measurably still move towards the optimum when the
      // curvature is large; allow a few before giving up.
      flat_steps = (accepted && gain <= 0.0) ? flat_steps + 1 : 0;
      if (!accepted || flat_steps > kMaxFlatSteps) return Status::stalled;
    }
    return Status::exhausted;
  }

  Estimate finish(const Point& pt, std::optional<double> beta, Status status, int iterations,
                  SolverDiagnostics diag) const {
    const Matrix rho = state(pt.x);
    Matrix g = Matrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < effects_.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      g += (counts_[idx] / pt.p[idx]) * effects_[i];
    }
    double c = n_;
    if (beta) {
      g += pt.vectors * (*beta * pt.spectrum.cwiseInverse()).cast<Complex>().asDiagonal() *
           pt.vectors.adjoint();
      c += *beta * static_cast<double>(dim_);
    }
    const Matrix g_tilde = g - c * Matrix::Identity(dim_, dim_);
    diag.stationarity = beta ? g_tilde.norm() : (g_tilde * rho).norm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    diag.duality_gap = es.eigenvalues().maxCoeff() - c;
    diag.converged = status != Status::exhausted &&
                     diag.stationarity <= cfg_.stationarity_tol * scale_ &&
                     diag.duality_gap <= cfg_.gap_tol * scale_;
    diag.iterations = iterations;
    diag.final_objective = pt.loglik + (beta ? *beta * pt.logdet : 0.0);
    DensityMatrix out(rho);
    diag.min_eigenvalue = out.min_eigenvalue();
    return Estimate{std::move(out), std::move(diag)};
  }

  const SolverConfig& cfg_;
  Eigen::Index dim_;
  std::vector<Matrix> basis_;
  std::vector<Matrix> effects_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd offset_;
  Eigen::VectorXd counts_;
  double n_ = 0.0;
  double scale_ = 1.0;
};

// True when some direction K with Tr[K E_i] = 0 for every observed effect
// keeps rho + tK positive for small |t| of both signs, i.e. K vanishes on
// the kernel of rho.
bool flat_along_feasible_direction(const MeasurementRecord& rec, const DensityMatrix& rho) {
  std::vector<const Matrix*> observed;
  for (const auto& item : rec.items()) {
    if (item.count > 0) observed.push_back(&item.effect.matrix());
  }
  const std::vector<Matrix> basis = traceless_hermitian_basis(rec.dim());
  const EigenDecomposition eig = eig_hermitian(rho.matrix());
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values[k] <= 1e-9) kernel.push_back(k);
  }
  const auto nulls = null_vectors(design_matrix(observed, basis));
  if (kernel.empty()) return !nulls.empty();
  // Directions in the null space are feasible iff K v = 0 for every kernel
  // vector v: a linear condition on the null-space coefficients.
  const Eigen::Index d = rec.dim();
  Eigen::MatrixXd constraint(2 * d * static_cast<Eigen::Index>(kernel.size()),
                             static_cast<Eigen::Index>(nulls.size()));
  for (std::size_t j = 0; j < nulls.size(); ++j) {
    const Matrix k = combine(basis, nulls[j]);
    Eigen::Index row = 0;
    for (Eigen::Index idx : kernel) {
      const Eigen::VectorXcd kv = k * eig.vectors.col(idx);
      for (Eigen::Index r = 0; r < d; ++r) {
        constraint(row++, static_cast<Eigen::Index>(j)) = kv[r].real();
        constraint(row++, static_cast<Eigen::Index>(j)) = kv[r].imag();
      }
    }
  }
  if (nulls.empty()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraint);
  const auto& sv = svd.singularValues();
  // Fewer nonzero singular values than unknowns leaves a feasible direction.
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv[k] > 1e-8;
  return rank < constraint.cols();
}

}  // namespace

std::string_view to_string(SolverMethod m) {
  return m == SolverMethod::newton ? "newton" : "diluted";
}

SolverMethod parse_solver_method(std::string_view s) {
  if (s == "newton") return SolverMethod::newton;
  if (s == "diluted") return SolverMethod::diluted;
  throw std::invalid_argument("unknown solver method '" + std::string(s) + "'");
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (!(gap_tol > 0.0) || !(stationarity_tol > 0.0)) {
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  }
  if (!(initial_step > 0.0) || !(max_step >= initial_step)) {
    throw std::invalid_argument("SolverConfig: need 0 < initial_step <= max_step");
  }
  if (!(barrier_floor > 0.0) || !(min_eigenvalue_floor >= 0.0)) {
    throw std::invalid_argument("SolverConfig: barrier_floor must be positive");
  }
}

double LinearInversionResult::min_eigenvalue() const {
  return eig_hermitian(matrix).values.minCoeff();
}

std::vector<Matrix> traceless_hermitian_basis(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("traceless_hermitian_basis: dim must be positive");
  std::vector<Matrix> basis;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index k = j + 1; k < dim; ++k) {
      Matrix sym = Matrix::Zero(dim, dim);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      basis.push_back(sym);
      Matrix anti = Matrix::Zero(dim, dim);
      anti(j, k) = Complex(0.0, -inv_sqrt2);
      anti(k, j) = Complex(0.0, inv_sqrt2);
      basis.push_back(anti);
    }
  }
  for (Eigen::Index l = 1; l < dim; ++l) {
    Matrix diag = Matrix::Zero(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index k = 0; k < l; ++k) diag(k, k) = norm;
    diag(l, l) = -static_cast<double>(l) * norm;
    basis.push_back(diag);
  }
  return basis;
}

LinearInversionResult linear_inversion(const MeasurementRecord& rec) {
  if (rec.total() == 0) throw std::invalid_argument("linear_inversion: no observations");
  const Eigen::Index d = rec.dim();
  const std::vector<Matrix> basis = traceless_hermitian_basis(d);
  std::vector<const Matrix*> effects;
  Eigen::VectorXd target(static_cast<Eigen::Index>(rec.size()));
  const double n = static_cast<double>(rec.total());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& item = rec[i];
    effects.push_back(&item.effect.matrix());
    const double frequency = static_cast<double>(item.count) / (item.weight * n);
    target[static_cast<Eigen::Index>(i)] =
        frequency - item.effect.matrix().trace().real() / static_cast<double>(d);
  }
  const Eigen::MatrixXd a = design_matrix(effects, basis);

  if (!basis.empty()) {
    const auto nulls = null_vectors(a);
    if (!nulls.empty()) {
      std::vector<Matrix> directions;
      for (const auto& v : nulls) directions.push_back(combine(basis, v));
      std::ostringstream os;
      os << "linear_inversion: effects leave " << directions.size()
         << " traceless direction(s) undetermined";
      throw UnderdeterminedSystem(os.str(), std::move(directions));
    }
  }

  LinearInversionResult out;
  out.matrix = Matrix::Identity(d, d) / static_cast<double>(d);
  if (!basis.empty()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd x = svd.solve(target);
    out.matrix += combine(basis, x);
    out.residual = (a * x - target).norm();
  } else {
    out.residual = target.norm();
  }
  out.matrix = hermitian_part(out.matrix);
  return out;
}

Estimate mle(const MeasurementRecord& rec, const SolverConfig& cfg) {
  cfg.validate();
  if (rec.total() == 0) throw std::invalid_argument("mle: no observations");
  Estimate est = cfg.method == SolverMethod::newton ? Newton(rec, cfg).plain()
                                                   : Ascent(rec, std::nullopt, cfg).run();
  est.diagnostics.degenerate = flat_along_feasible_direction(rec, est.state);
  return est;
}

Estimate hmle(const MeasurementRecord& rec, HedgingParameter beta, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.method == SolverMethod::newton) return Newton(rec, cfg).hedged(beta.value());
  return Ascent(rec, beta.value(), cfg).run();
}

DensityMatrix projective_hmle_closed_form(const classical::CountVector& counts,
                                          const Matrix& basis, HedgingParameter beta) {
  const Eigen::Index d = basis.rows();
  if (basis.cols() != d || static_cast<Eigen::Index>(counts.size()) != d) {
    throw DimensionMismatch("projective_hmle_closed_form: basis and counts disagree");
  }
  if ((basis.adjoint() * basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("projective_hmle_closed_form: basis is not orthonormal");
  }
  const classical::ProbabilityVector p = classical::lidstone_estimate(counts, beta.value());
  Matrix rho = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    rho += p[static_cast<std::size_t>(k)] * basis.col(k) * basis.col(k).adjoint();
  }
  rho /= rho.trace().real();
  return DensityMatrix(hermitian_part(rho));
}

LikelihoodRatioCheck verify_likelihood_ratio(const MeasurementRecord& rec, HedgingParameter beta,
                                             const DensityMatrix& rho_mle,
                                             const DensityMatrix& rho_h) {
  LikelihoodRatioCheck out;
  out.bound = std::exp(-static_cast<double>(rec.dim()) * beta.value());
  const double l_mle = log_likelihood(rho_mle, rec);
  const double l_h = log_likelihood(rho_h, rec);
  if (std::isinf(l_mle) && std::isinf(l_h)) {
    out.indeterminate = true;
    out.log_ratio = std::numeric_limits<double>::quiet_NaN();
    out.ratio = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.log_ratio = l_h - l_mle;
  out.ratio = std::exp(out.log_ratio);
  out.holds = out.ratio >= out.bound * (1.0 - 1e-9);
  out.mle_is_max = out.ratio <= 1.0 + 1e-9;
  return out;
}

}  // namespace hedge
