#pragma once

// State estimators: linear inversion, maximum likelihood, hedged maximum
// likelihood, the closed form for single-basis data, and a check of the
// likelihood-ratio guarantee between the last two.

#include <string>
#include <string_view>
#include <vector>

#include "hedge/classical.hpp"
#include "hedge/likelihood.hpp"
#include "hedge/qstate.hpp"

namespace hedge {

/// Least-squares fit of the Born rule to observed frequencies over trace-one
/// Hermitian matrices. Not necessarily positive.
struct LinearInversionResult {
  Matrix matrix;
  double residual = 0.0;  // Euclidean norm of the frequency residual

  double min_eigenvalue() const;
};

/// The effects do not determine a unique trace-one Hermitian fit.
/// `null_directions` spans the unidentifiable traceless subspace.
class UnderdeterminedSystem : public std::invalid_argument {
 public:
  UnderdeterminedSystem(const std::string& what, std::vector<Matrix> null_directions)
      : std::invalid_argument(what), null_directions_(std::move(null_directions)) {}

  const std::vector<Matrix>& null_directions() const { return null_directions_; }

 private:
  std::vector<Matrix> null_directions_;
};

/// Fits Tr[rho E_i] = n_i / N_j, where N_j = w_j N is the shot count of the
/// sub-measurement that produced E_i. Rank is decided at singular-value
/// threshold 1e-10 relative to the largest. Requires N >= 1.
LinearInversionResult linear_inversion(const MeasurementRecord& rec);

/// Orthonormal (Tr[B_a B_b] = delta_ab) basis of traceless Hermitian d x d
/// matrices: d^2 - 1 generalized Gell-Mann matrices.
std::vector<Matrix> traceless_hermitian_basis(Eigen::Index dim);

enum class SolverMethod {
  // Damped Newton ascent in trace-one coordinates. The plain likelihood is
  // maximized along the central path of the log-det barrier.
  newton,
  // Diluted multiplicative ascent rho <- A rho A / Tr, A = I + t (G/c - I).
  diluted,
};

std::string_view to_string(SolverMethod m);
SolverMethod parse_solver_method(std::string_view s);

struct SolverConfig {
  SolverMethod method = SolverMethod::newton;
  double tol = 1e-10;     // objective change / Newton decrement at convergence
  int max_iter = 20000;
  // Required certified optimality gap, relative to max(N, 1). The gap
  // lambda_max(G) - Tr[G rho] bounds how far the objective is below its max.
  double gap_tol = 1e-9;
  // Projected-gradient norm accepted at convergence, relative to max(N, 1).
  double stationarity_tol = 1e-6;
  // Diluted method: first trial step as a fraction of the full R rho R step,
  // and the largest step it may grow to.
  double initial_step = 1.0;
  double max_step = 1.0;
  // Hedged iterates may not come closer to the boundary than this.
  double min_eigenvalue_floor = 1e-14;
  // Newton MLE: smallest barrier weight, relative to max(N, 1).
  double barrier_floor = 1e-15;
  bool keep_trace = false;

  void validate() const;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  double min_eigenvalue = 0.0;
  double stationarity = 0.0;  // projected-gradient norm at the returned point
  double duality_gap = 0.0;   // upper bound on (max objective - final_objective)
  bool degenerate = false;    // MLE only: the likelihood is flat along a feasible direction
  std::vector<double> objective_trace;  // filled when SolverConfig::keep_trace
};

struct Estimate {
  DensityMatrix state;
  SolverDiagnostics diagnostics;
};

/// Maximizes log_likelihood over density matrices, starting from I/d.
/// Requires N >= 1. Non-convergence is reported through
/// diagnostics.converged rather than thrown; the best iterate is returned.
/// With the Newton method the objective trace holds the likelihood at the
/// end of each barrier stage.
Estimate mle(const MeasurementRecord& rec, const SolverConfig& cfg = {});

/// Maximizes log_likelihood + beta ln det rho. The result is full rank.
/// At the optimum R(rho) + beta rho^{-1} = (N + d beta) I.
Estimate hmle(const MeasurementRecord& rec, HedgingParameter beta, const SolverConfig& cfg = {});

/// sum_k (n_k + beta)/(N + d beta) |u_k><u_k| for counts observed in the
/// orthonormal basis given by the columns of `basis`.
DensityMatrix projective_hmle_closed_form(const classical::CountVector& counts,
                                          const Matrix& basis, HedgingParameter beta);

struct LikelihoodRatioCheck {
  double log_ratio = 0.0;  // l(rho_H) - l(rho_MLE)
  double ratio = 0.0;
  double bound = 0.0;      // e^{-d beta}
  bool holds = false;      // ratio >= bound (1 - 1e-9)
  bool mle_is_max = false; // ratio <= 1 + 1e-9
  bool indeterminate = false;
};

/// Checks L(rho_H)/L(rho_MLE) >= e^{-d beta}. When both likelihoods vanish the
/// ratio is indeterminate and reported as such (holds = false).
LikelihoodRatioCheck verify_likelihood_ratio(const MeasurementRecord& rec, HedgingParameter beta,
                                             const DensityMatrix& rho_mle,
                                             const DensityMatrix& rho_h);

}  // namespace hedge
