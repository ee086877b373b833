#include "hedge/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace hedge::mc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Calls fn(i) for i in [0, jobs) on a pool of workers. fn must only write
// to slot i of its output.
template <typename Fn>
void parallel_for(std::size_t jobs, unsigned threads, Fn&& fn) {
  const unsigned workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) fn(i);
    });
  }
}

std::vector<double> score(const DensityMatrix& truth, const DensityMatrix& estimate,
                          const std::vector<Metric>& metrics) {
  std::vector<double> out;
  out.reserve(metrics.size());
  for (Metric m : metrics) {
    switch (m) {
      case Metric::kl: out.push_back(quantum_relative_entropy(truth, estimate)); break;
      case Metric::infidelity: out.push_back(infidelity(truth, estimate)); break;
      case Metric::trace: out.push_back(trace_distance(truth, estimate)); break;
      case Metric::hs: out.push_back(hs_distance(truth, estimate)); break;
    }
  }
  return out;
}

std::vector<double> score_linear(const DensityMatrix& truth, const Matrix& estimate,
                                 const std::vector<Metric>& metrics) {
  const bool physical = eig_hermitian(estimate).values.minCoeff() >= -tolerance::kNegativeEigenvalue;
  if (physical) return score(truth, DensityMatrix(estimate), metrics);
  std::vector<double> out;
  for (Metric m : metrics) {
    switch (m) {
      case Metric::kl:
      case Metric::infidelity: out.push_back(kInf); break;
      case Metric::trace: out.push_back(trace_distance(truth.matrix(), estimate)); break;
      case Metric::hs: out.push_back(hs_distance(truth.matrix(), estimate)); break;
    }
  }
  return out;
}

bool wants(const std::vector<EstimatorKind>& list, EstimatorKind e) {
  return std::find(list.begin(), list.end(), e) != list.end();
}

struct TrialOutput {
  std::vector<TrialResult> results;
  std::vector<Incident> violations;
  std::vector<Incident> failures;
  std::size_t checks = 0;
};

TrialOutput run_trial(const ExperimentConfig& cfg, const DensityMatrix& truth,
                      std::size_t state_id, std::size_t dataset_id) {
  TrialOutput out;
  const std::uint64_t seed = trial_seed(cfg.master_seed, state_id, dataset_id);
  std::mt19937_64 rng(seed);
  const MeasurementRecord rec = simulate_pauli_data(truth, cfg.shots_per_basis, rng);

  auto incident = [&](std::string kind, double beta, double value) {
    return Incident{std::move(kind), state_id, dataset_id, beta, value, seed};
  };

  const bool need_hmle = wants(cfg.estimators, EstimatorKind::hmle);
  const LinearInversionResult tomo = linear_inversion(rec);
  const double tomo_min = tomo.min_eigenvalue();

  std::optional<Estimate> ml;
  if (need_hmle || wants(cfg.estimators, EstimatorKind::mle)) {
    ml = mle(rec, cfg.solver);
    if (!ml->diagnostics.converged) {
      out.failures.push_back(incident("mle_unconverged", 0.0, ml->diagnostics.duality_gap));
    }
    // The checks are statements about the exact optima; an unconverged solve
    // is reported as a solver failure instead.
    if (ml->diagnostics.converged) ++out.checks;
    if (ml->diagnostics.converged && tomo_min < -1e-6 && ml->diagnostics.min_eigenvalue > 1e-6) {
      out.violations.push_back(incident("rank_deficiency", 0.0, ml->diagnostics.min_eigenvalue));
    }
  }

  for (EstimatorKind kind : cfg.estimators) {
    switch (kind) {
      case EstimatorKind::mle:
        out.results.push_back({state_id, dataset_id, kind, 0.0, score(truth, ml->state, cfg.metrics),
                               ml->diagnostics.converged});
        break;
      case EstimatorKind::linear:
        out.results.push_back(
            {state_id, dataset_id, kind, 0.0, score_linear(truth, tomo.matrix, cfg.metrics), true});
        break;
      case EstimatorKind::hmle:
        for (double beta : cfg.betas) {
          const Estimate h = hmle(rec, HedgingParameter(beta), cfg.solver);
          if (!h.diagnostics.converged) {
            out.failures.push_back(incident("hmle_unconverged", beta, h.diagnostics.stationarity));
          }
          if (!(h.diagnostics.min_eigenvalue > 0.0)) {
            out.violations.push_back(incident("hmle_not_positive", beta, h.diagnostics.min_eigenvalue));
          }
          if (ml->diagnostics.converged && h.diagnostics.converged) {
            const LikelihoodRatioCheck check =
                verify_likelihood_ratio(rec, HedgingParameter(beta), ml->state, h.state);
            out.checks += 2;
            if (!check.holds) out.violations.push_back(incident("likelihood_ratio", beta, check.ratio));
            if (!(check.ratio <= 1.0 + 1e-6)) {
              out.violations.push_back(incident("mle_not_max", beta, check.ratio));
            }
          }
          out.results.push_back({state_id, dataset_id, kind, beta,
                                 score(truth, h.state, cfg.metrics), h.diagnostics.converged});
        }
        break;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::hmle: return "hmle";
    case EstimatorKind::linear: return "linear";
  }
  return "?";
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kl: return "kl";
    case Metric::infidelity: return "infidelity";
    case Metric::trace: return "trace";
    case Metric::hs: return "hs";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view s) {
  if (s == "mle") return EstimatorKind::mle;
  if (s == "hmle") return EstimatorKind::hmle;
  if (s == "linear") return EstimatorKind::linear;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

Metric parse_metric(std::string_view s) {
  if (s == "kl") return Metric::kl;
  if (s == "infidelity") return Metric::infidelity;
  if (s == "trace") return Metric::trace;
  if (s == "hs") return Metric::hs;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t state_id,
                         std::uint64_t dataset_id) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ state_id);
  h = splitmix64(h ^ (dataset_id * 0xd1b54a32d192ed03ULL));
  return h;
}

namespace {

BlochVector random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const double x = gauss(rng), y = gauss(rng), z = gauss(rng);
    const double n = std::sqrt(x * x + y * y + z * z);
    if (n > 1e-12) return {x / n, y / n, z / n};
  }
}

}  // namespace

DensityMatrix sample_hs_state(std::mt19937_64& rng) {
  const BlochVector dir = random_direction(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = std::cbrt(unit(rng));
  return from_bloch({r * dir.x, r * dir.y, r * dir.z});
}

DensityMatrix sample_pure_state(std::mt19937_64& rng) {
  return from_bloch(random_direction(rng));
}

std::vector<Povm> pauli_povms() {
  const Matrix id = Matrix::Identity(2, 2);
  std::vector<Povm> out;
  for (const Matrix& s : {pauli_x(), pauli_y(), pauli_z()}) {
    out.emplace_back(std::vector<Effect>{Effect(0.5 * (id + s)), Effect(0.5 * (id - s))});
  }
  return out;
}

MeasurementRecord simulate_pauli_data(const DensityMatrix& rho, std::uint64_t shots_per_basis,
                                      std::mt19937_64& rng) {
  if (rho.dim() != 2) throw DimensionMismatch("simulate_pauli_data: qubit state required");
  if (shots_per_basis == 0) throw std::invalid_argument("simulate_pauli_data: need N >= 1");
  static const std::vector<Povm> povms = pauli_povms();
  const BlochVector b = to_bloch(rho);
  const double axis[3] = {b.x, b.y, b.z};
  std::vector<MeasurementRun> runs;
  for (int a = 0; a < 3; ++a) {
    const double p_plus = std::clamp(0.5 * (1.0 + axis[a]), 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> draw(shots_per_basis, p_plus);
    const std::uint64_t plus = draw(rng);
    runs.push_back({povms[static_cast<std::size_t>(a)], {plus, shots_per_basis - plus}});
  }
  return pool_measurements(runs);
}

void ExperimentConfig::validate() const {
  if (n_states < 1 || n_datasets < 1 || shots_per_basis < 1) {
    throw std::invalid_argument("ExperimentConfig: counts must be >= 1");
  }
  if (estimators.empty()) throw std::invalid_argument("ExperimentConfig: no estimators");
  if (metrics.empty()) throw std::invalid_argument("ExperimentConfig: no metrics");
  if (wants(estimators, EstimatorKind::hmle) && betas.empty()) {
    throw std::invalid_argument("ExperimentConfig: hmle requested with an empty beta grid");
  }
  for (double b : betas) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("ExperimentConfig: beta values must be positive");
    }
  }
  solver.validate();
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepReport report;
  report.config = cfg;
  report.regime_boundary = std::sqrt(3.0 / static_cast<double>(cfg.shots_per_basis));

  std::vector<DensityMatrix> truths;
  truths.reserve(cfg.n_states);
  for (std::size_t s = 0; s < cfg.n_states; ++s) {
    std::mt19937_64 rng(trial_seed(cfg.master_seed, s, kStateStream));
    truths.push_back(sample_hs_state(rng));
    const RadialCoordinate rc = radial_coordinate(truths.back());
    report.states.push_back({s, to_bloch(truths.back()), rc.r_sq, rc.bloch_radius});
  }

  const std::size_t jobs = cfg.n_states * cfg.n_datasets;
  std::vector<TrialOutput> outputs(jobs);
  parallel_for(jobs, cfg.threads, [&](std::size_t i) {
    const std::size_t s = i / cfg.n_datasets;
    outputs[i] = run_trial(cfg, truths[s], s, i % cfg.n_datasets);
  });

  for (auto& o : outputs) {
    report.checks_run += o.checks;
    for (auto& r : o.results) report.trials.push_back(std::move(r));
    for (auto& v : o.violations) report.violations.push_back(std::move(v));
    for (auto& f : o.failures) report.solver_failures.push_back(std::move(f));
  }

  // Per-state aggregation. Within a state, trials are grouped by dataset, so
  // collect each (estimator, beta) series by its position within a dataset.
  const std::size_t per_dataset = jobs == 0 ? 0 : report.trials.size() / jobs;
  for (std::size_t s = 0; s < cfg.n_states; ++s) {
    for (std::size_t slot = 0; slot < per_dataset; ++slot) {
      const TrialResult& head = report.trials[(s * cfg.n_datasets) * per_dataset + slot];
      for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
        SummaryRow row{s, head.estimator, head.beta, cfg.metrics[m], 0.0, 0, 0};
        double sum = 0.0;
        for (std::size_t d = 0; d < cfg.n_datasets; ++d) {
          const double e = report.trials[(s * cfg.n_datasets + d) * per_dataset + slot].errors[m];
          if (std::isinf(e)) {
            ++row.n_infinite;
          } else {
            sum += e;
            ++row.n_finite;
          }
        }
        row.mean_error = row.n_infinite > 0 ? kInf
                         : row.n_finite > 0 ? sum / static_cast<double>(row.n_finite)
                                            : std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

BandMean band_mean(const SweepReport& report, double lo, double hi, EstimatorKind estimator,
                   double beta, Metric metric) {
  BandMean out;
  double sum = 0.0;
  for (const SummaryRow& row : report.rows) {
    if (row.estimator != estimator || row.metric != metric || row.beta != beta) continue;
    const double x = report.states[row.state_id].one_minus_r_sq();
    if (x < lo || x >= hi) continue;
    ++out.n_states;
    if (std::isinf(row.mean_error)) {
      ++out.n_infinite_states;
    } else {
      sum += row.mean_error;
    }
  }
  if (out.n_states == 0) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
  } else if (out.n_infinite_states > 0) {
    out.mean = kInf;
  } else {
    out.mean = sum / static_cast<double>(out.n_states);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi >= lo) || points == 0) {
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and at least one point");
  }
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

BinnedCurves bin_by_radius(const SweepReport& report, std::size_t n_bins) {
  if (report.states.empty()) throw std::invalid_argument("bin_by_radius: empty report");
  if (n_bins == 0) throw std::invalid_argument("bin_by_radius: need at least one bin");
  BinnedCurves out;
  out.edges = log_grid(1e-4, 0.25, n_bins + 1);
  out.regime_boundary = report.regime_boundary;
  out.state_counts.assign(n_bins, 0);
  for (const StateInfo& st : report.states) {
    const double x = st.one_minus_r_sq();
    const auto it = std::upper_bound(out.edges.begin() + 1, out.edges.end() - 1, x);
    const auto bin = static_cast<std::size_t>(it - (out.edges.begin() + 1));
    out.state_bin.push_back(bin);
    ++out.state_counts[bin];
  }

  // One curve per (estimator, beta, metric) in first-seen order.
  for (const SummaryRow& row : report.rows) {
    auto curve = std::find_if(out.curves.begin(), out.curves.end(), [&](const BinnedCurve& c) {
      return c.estimator == row.estimator && c.beta == row.beta && c.metric == row.metric;
    });
    if (curve == out.curves.end()) {
      out.curves.push_back({row.estimator, row.beta, row.metric, std::vector<double>(n_bins, 0.0),
                            std::vector<std::size_t>(n_bins, 0)});
      curve = out.curves.end() - 1;
    }
    const std::size_t bin = out.state_bin[row.state_id];
    if (std::isinf(row.mean_error)) {
      ++curve->n_infinite_states[bin];
    } else {
      curve->means[bin] += row.mean_error;
    }
  }
  for (BinnedCurve& c : out.curves) {
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (out.state_counts[b] == 0) {
        c.means[b] = std::numeric_limits<double>::quiet_NaN();
      } else if (c.n_infinite_states[b] > 0) {
        c.means[b] = kInf;
      } else {
        c.means[b] /= static_cast<double>(out.state_counts[b]);
      }
    }
  }
  return out;
}

BetaScanResult pure_state_beta_scan(const BetaScanConfig& cfg) {
  if (cfg.betas.empty()) throw std::invalid_argument("pure_state_beta_scan: empty beta grid");
  if (cfg.shots_grid.empty()) throw std::invalid_argument("pure_state_beta_scan: empty N grid");
  if (cfg.n_states == 0 || cfg.n_datasets == 0) {
    throw std::invalid_argument("pure_state_beta_scan: need at least one state and dataset");
  }
  for (double b : cfg.betas) HedgingParameter{b};
  cfg.solver.validate();

  BetaScanResult result;
  const auto [lo_it, hi_it] = std::minmax_element(cfg.betas.begin(), cfg.betas.end());
  for (std::uint64_t n : cfg.shots_grid) {
    if (n == 0) throw std::invalid_argument("pure_state_beta_scan: N must be >= 1");
    const double root = std::sqrt(static_cast<double>(n));
    if (*lo_it > 1.0 / (8.0 * root) || *hi_it < 4.0 / root) {
      result.grid_covers_recommended_span = false;
    }

    // Distinct stream per N so grids do not share datasets across N.
    const std::uint64_t master = splitmix64(cfg.master_seed ^ (n * 0x9e3779b97f4a7c15ULL));
    std::vector<DensityMatrix> truths;
    for (std::size_t s = 0; s < cfg.n_states; ++s) {
      std::mt19937_64 rng(trial_seed(master, s, kStateStream));
      truths.push_back(sample_pure_state(rng));
    }

    const std::size_t jobs = cfg.n_states * cfg.n_datasets;
    const std::size_t nb = cfg.betas.size();
    std::vector<double> kl(jobs * nb);
    std::vector<char> unconverged(jobs * nb, 0);
    parallel_for(jobs, cfg.threads, [&](std::size_t i) {
      const std::size_t s = i / cfg.n_datasets;
      std::mt19937_64 rng(trial_seed(master, s, i % cfg.n_datasets));
      const MeasurementRecord rec = simulate_pauli_data(truths[s], n, rng);
      for (std::size_t b = 0; b < nb; ++b) {
        const Estimate h = hmle(rec, HedgingParameter(cfg.betas[b]), cfg.solver);
        kl[i * nb + b] = quantum_relative_entropy(truths[s], h.state);
        unconverged[i * nb + b] = h.diagnostics.converged ? 0 : 1;
      }
    });

    double best = kInf;
    double best_beta = cfg.betas.front();
    for (std::size_t b = 0; b < nb; ++b) {
      BetaScanRow row{n, cfg.betas[b], 0.0, jobs, 0};
      double sum = 0.0;
      for (std::size_t i = 0; i < jobs; ++i) {
        sum += kl[i * nb + b];
        row.n_unconverged += static_cast<std::size_t>(unconverged[i * nb + b]);
      }
      row.mean_kl = sum / static_cast<double>(jobs);
      if (row.mean_kl < best) {
        best = row.mean_kl;
        best_beta = row.beta;
      }
      result.rows.push_back(row);
    }
    result.argmin.emplace_back(n, best_beta);
  }
  return result;
}

}  // namespace hedge::mc
