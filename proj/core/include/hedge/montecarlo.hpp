#pragma once

// Monte Carlo accuracy experiments on a single qubit: random states,
// simulated Pauli measurements, estimator sweeps over beta, aggregated
// errors, and radial binning.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hedge/estimators.hpp"
#include "hedge/likelihood.hpp"
#include "hedge/qstate.hpp"

namespace hedge::mc {

enum class EstimatorKind { mle, hmle, linear };
enum class Metric { kl, infidelity, trace, hs };

std::string_view to_string(EstimatorKind e);
std::string_view to_string(Metric m);
EstimatorKind parse_estimator(std::string_view s);
Metric parse_metric(std::string_view s);

/// Keyed 64-bit mix of (master, state, dataset) used to give every trial an
/// independent generator regardless of execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t state_id,
                         std::uint64_t dataset_id);
/// Dataset id reserved for drawing the true state itself.
inline constexpr std::uint64_t kStateStream = ~std::uint64_t{0};

/// Hilbert-Schmidt random qubit: Bloch vector uniform in the unit ball.
DensityMatrix sample_hs_state(std::mt19937_64& rng);
/// Pure qubit with Bloch vector uniform on the unit sphere.
DensityMatrix sample_pure_state(std::mt19937_64& rng);

/// Eigenbases of sigma_x, sigma_y, sigma_z as two-outcome POVMs (+1 first).
std::vector<Povm> pauli_povms();

/// N shots in each Pauli basis; the +1 count per axis is binomial with
/// success probability (1 + b_a)/2. The three runs are pooled (weights 1/3).
MeasurementRecord simulate_pauli_data(const DensityMatrix& rho, std::uint64_t shots_per_basis,
                                      std::mt19937_64& rng);

struct ExperimentConfig {
  std::size_t n_states = 100;
  std::size_t n_datasets = 200;
  std::uint64_t shots_per_basis = 100;
  std::vector<double> betas{0.01, 0.1, 0.5};
  std::vector<EstimatorKind> estimators{EstimatorKind::mle, EstimatorKind::hmle};
  std::vector<Metric> metrics{Metric::kl, Metric::infidelity, Metric::trace, Metric::hs};
  std::uint64_t master_seed = 0;
  SolverConfig solver{};
  // Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;

  void validate() const;
};

/// Errors of one estimate against the true state, aligned with
/// ExperimentConfig::metrics. KL may be +inf. Non-physical linear-inversion
/// estimates have undefined KL and infidelity, recorded as +inf.
struct TrialResult {
  std::size_t state_id = 0;
  std::size_t dataset_id = 0;
  EstimatorKind estimator = EstimatorKind::hmle;
  double beta = 0.0;  // 0 for mle and linear
  std::vector<double> errors;
  bool converged = true;
};

struct StateInfo {
  std::size_t state_id = 0;
  BlochVector bloch;
  double r_sq = 0.0;          // (1 + Tr rho^2)/2
  double bloch_radius = 0.0;

  double one_minus_r_sq() const { return 1.0 - r_sq; }
};

/// Mean over datasets for one (state, estimator, beta, metric). The mean is
/// +inf whenever any contributing trial is infinite; the split is kept.
struct SummaryRow {
  std::size_t state_id = 0;
  EstimatorKind estimator = EstimatorKind::hmle;
  double beta = 0.0;
  Metric metric = Metric::kl;
  double mean_error = 0.0;
  std::size_t n_finite = 0;
  std::size_t n_infinite = 0;
};

/// A failed check or solve, with the trial's seed for replay.
struct Incident {
  std::string kind;
  std::size_t state_id = 0;
  std::size_t dataset_id = 0;
  double beta = 0.0;
  double value = 0.0;
  std::uint64_t seed = 0;
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<StateInfo> states;
  std::vector<TrialResult> trials;   // ordered by state, dataset, estimator, beta
  std::vector<SummaryRow> rows;      // ordered by state, estimator, beta, metric
  double regime_boundary = 0.0;      // sqrt(3/N)
  std::size_t checks_run = 0;
  std::vector<Incident> violations;  // likelihood-ratio, rank-deficiency, positivity
  std::vector<Incident> solver_failures;
};

/// Runs every (state, dataset) trial. Deterministic in master_seed. Solver
/// failures and failed checks are collected, never thrown.
SweepReport run_sweep(const ExperimentConfig& cfg);

/// Mean of per-state mean errors over states whose 1 - r^2 lies in [lo, hi).
struct BandMean {
  double mean = 0.0;
  std::size_t n_states = 0;
  std::size_t n_infinite_states = 0;
};
BandMean band_mean(const SweepReport& report, double lo, double hi, EstimatorKind estimator,
                   double beta, Metric metric);

struct BinnedCurve {
  EstimatorKind estimator = EstimatorKind::hmle;
  double beta = 0.0;
  Metric metric = Metric::kl;
  std::vector<double> means;        // per bin; NaN for empty bins
  std::vector<std::size_t> n_infinite_states;
};

struct BinnedCurves {
  std::vector<double> edges;        // n_bins + 1 edges in 1 - r^2
  std::vector<std::size_t> state_counts;
  std::vector<std::size_t> state_bin;  // bin index per state
  std::vector<BinnedCurve> curves;
  double regime_boundary = 0.0;
};

/// Log-spaced bins in 1 - r^2 between 1e-4 and 0.25; values outside are
/// clamped into the first or last bin.
BinnedCurves bin_by_radius(const SweepReport& report, std::size_t n_bins);

struct BetaScanConfig {
  std::vector<std::uint64_t> shots_grid{100, 400};
  std::vector<double> betas;
  std::size_t n_states = 50;
  std::size_t n_datasets = 200;
  std::uint64_t master_seed = 0;
  SolverConfig solver{};
  unsigned threads = 0;
};

struct BetaScanRow {
  std::uint64_t shots_per_basis = 0;
  double beta = 0.0;
  double mean_kl = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_unconverged = 0;
};

struct BetaScanResult {
  std::vector<BetaScanRow> rows;  // ordered by N then beta
  std::vector<std::pair<std::uint64_t, double>> argmin;  // (N, best beta)
  // False when some N's grid misses [1/(8 sqrt N), 4/sqrt N].
  bool grid_covers_recommended_span = true;
};

/// Mean D(rho || rho_H) over uniformly random pure qubit states, per (N, beta).
/// The same simulated datasets are reused across beta.
BetaScanResult pure_state_beta_scan(const BetaScanConfig& cfg);

/// Log-spaced grid with `points` values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);

}  // namespace hedge::mc
