#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "cli/verify.hpp"
#include "hedge/classical.hpp"
#include "hedge/estimators.hpp"
#include "hedge/montecarlo.hpp"
#include "hedge/serialization.hpp"

namespace hedge::cli {

namespace {

using io::format_double;

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_double(xs[i]);
  }
  return s;
}

SolverConfig solver_config(const std::string& method, std::optional<double> tol,
                           std::optional<int> max_iter) {
  SolverConfig cfg;
  cfg.method = parse_solver_method(method);
  if (tol) cfg.tol = *tol;
  if (max_iter) cfg.max_iter = *max_iter;
  cfg.validate();
  return cfg;
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text_file(path, text);
  }
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string record;
  std::string method = "hmle";
  double beta = HedgingParameter::kDefault;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string solver = "newton";
  std::string out;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const MeasurementRecord rec = io::record_from_json(io::read_json_file(a.record));
  const SolverConfig cfg = solver_config(a.solver, a.tol, a.max_iter);
  const HedgingParameter beta(a.beta);

  if (a.method == "linear") {
    const LinearInversionResult lin = linear_inversion(rec);
    io::Json j = io::matrix_to_json(lin.matrix);
    j["residual"] = lin.residual;
    if (!a.out.empty()) io::write_text_file(a.out, j.dump(2) + "\n");
    out << "method linear\n"
        << "log_likelihood " << format_double(log_likelihood(lin.matrix, rec)) << "\n"
        << "min_eigenvalue " << format_double(lin.min_eigenvalue()) << "\n"
        << "residual " << format_double(lin.residual) << "\n";
    return kOk;
  }

  const Estimate est = a.method == "mle" ? mle(rec, cfg) : hmle(rec, beta, cfg);
  if (!a.out.empty()) io::write_text_file(a.out, io::estimate_to_json(est).dump(2) + "\n");
  const auto& d = est.diagnostics;
  out << "method " << a.method << "\n";
  if (a.method == "hmle") out << "beta " << format_double(beta.value()) << "\n";
  out << "log_likelihood " << format_double(log_likelihood(est.state, rec)) << "\n"
      << "hedged_log_likelihood " << format_double(hedged_log_likelihood(est.state, rec, beta))
      << "\n"
      << "min_eigenvalue " << format_double(d.min_eigenvalue) << "\n"
      << "iterations " << d.iterations << "\n"
      << "duality_gap " << format_double(d.duality_gap) << "\n"
      << "converged " << (d.converged ? "true" : "false") << "\n";
  if (d.degenerate) out << "note: likelihood is flat along a feasible direction; MLE not unique\n";
  return d.converged ? kOk : kNotConverged;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::vector<double> bloch;
  std::string state;
  std::uint64_t shots = 100;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  std::optional<DensityMatrix> rho;
  if (!a.state.empty()) {
    rho = io::density_from_json(io::read_json_file(a.state));
  } else {
    if (a.bloch.size() != 3) throw std::invalid_argument("--bloch takes three components x,y,z");
    rho = from_bloch(BlochVector{a.bloch[0], a.bloch[1], a.bloch[2]});
  }
  std::mt19937_64 rng(a.seed);
  const MeasurementRecord rec = mc::simulate_pauli_data(*rho, a.shots, rng);
  write_output(a.out, io::to_json(rec).dump(2) + "\n", out);
  return kOk;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::size_t n_states = 0;
  std::size_t n_datasets = 0;
  std::uint64_t shots = 0;
  std::vector<double> betas;
  std::vector<std::string> estimators;
  std::vector<std::string> metrics;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::string solver;
  unsigned threads = 0;
  std::size_t bins = 8;
  std::string out;
};

void print_binned(const mc::SweepReport& report, std::size_t n_bins, std::ostream& out) {
  const mc::BinnedCurves curves = mc::bin_by_radius(report, n_bins);
  out << "regime boundary sqrt(3/N) = " << format_double(curves.regime_boundary) << "\n";
  out << "bin_lo,bin_hi,states";
  for (const auto& c : curves.curves) {
    out << ',' << mc::to_string(c.metric) << ':' << mc::to_string(c.estimator);
    if (c.estimator == mc::EstimatorKind::hmle) out << '@' << format_double(c.beta);
  }
  out << "\n";
  for (std::size_t b = 0; b + 1 < curves.edges.size(); ++b) {
    out << format_double(curves.edges[b]) << ',' << format_double(curves.edges[b + 1]) << ','
        << curves.state_counts[b];
    for (const auto& c : curves.curves) out << ',' << format_double(c.means[b]);
    out << "\n";
  }
}

int cmd_sweep(const SweepArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  mc::ExperimentConfig cfg;
  bool seeded = false;
  if (!a.config.empty()) {
    io::Json j = io::read_json_file(a.config);
    // A sweep sidecar carries the config under "config".
    if (j.is_object() && j.contains("config")) j = j["config"];
    cfg = io::experiment_config_from_json(j);
    seeded = true;
  }
  if (sub.count("--n-states")) cfg.n_states = a.n_states;
  if (sub.count("--n-datasets")) cfg.n_datasets = a.n_datasets;
  if (sub.count("--shots-per-basis")) cfg.shots_per_basis = a.shots;
  if (sub.count("--betas")) cfg.betas = a.betas;
  if (sub.count("--estimators")) {
    cfg.estimators.clear();
    for (const auto& s : a.estimators) cfg.estimators.push_back(mc::parse_estimator(s));
  }
  if (sub.count("--metrics")) {
    cfg.metrics.clear();
    for (const auto& s : a.metrics) cfg.metrics.push_back(mc::parse_metric(s));
  }
  if (a.seed) {
    cfg.master_seed = *a.seed;
    seeded = true;
  }
  if (!seeded) throw CLI::RequiredError("--seed");
  if (a.max_iter) cfg.solver.max_iter = *a.max_iter;
  if (!a.solver.empty()) cfg.solver.method = parse_solver_method(a.solver);
  cfg.threads = a.threads;
  cfg.validate();

  const mc::SweepReport report = mc::run_sweep(cfg);
  const std::string csv = io::write_sweep_csv(io::csv_rows(report));
  io::write_text_file(a.out, csv);
  io::write_text_file(a.out + ".json", io::sweep_sidecar(report).dump(2) + "\n");

  out << "states " << report.states.size() << ", trials " << report.trials.size() << "\n"
      << "checks " << report.checks_run << ", violations " << report.violations.size()
      << ", solver failures " << report.solver_failures.size() << "\n";
  for (const auto& v : report.violations) {
    err << "violation " << v.kind << " state " << v.state_id << " dataset " << v.dataset_id
        << " beta " << format_double(v.beta) << " value " << format_double(v.value) << " seed "
        << v.seed << "\n";
  }
  for (const auto& f : report.solver_failures) {
    err << "solver failure " << f.kind << " state " << f.state_id << " dataset " << f.dataset_id
        << " beta " << format_double(f.beta) << " seed " << f.seed << "\n";
  }
  print_binned(report, a.bins, out);
  return report.solver_failures.empty() ? kOk : kNotConverged;
}

// ---- scan-beta --------------------------------------------------------------

struct ScanArgs {
  std::vector<std::uint64_t> shots_grid{100, 400};
  std::vector<double> betas;
  double beta_min = 0.005;
  double beta_max = 0.5;
  std::size_t beta_points = 15;
  std::size_t n_states = 50;
  std::size_t n_datasets = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
};

int cmd_scan_beta(const ScanArgs& a, std::ostream& out, std::ostream& err) {
  mc::BetaScanConfig cfg;
  cfg.shots_grid = a.shots_grid;
  cfg.betas = a.betas.empty() ? mc::log_grid(a.beta_min, a.beta_max, a.beta_points) : a.betas;
  cfg.n_states = a.n_states;
  cfg.n_datasets = a.n_datasets;
  cfg.master_seed = a.seed;
  cfg.threads = a.threads;
  const mc::BetaScanResult res = mc::pure_state_beta_scan(cfg);

  std::ostringstream csv;
  csv << "N,beta,mean_kl,n_trials,n_unconverged\n";
  std::size_t unconverged = 0;
  for (const auto& row : res.rows) {
    csv << row.shots_per_basis << ',' << format_double(row.beta) << ','
        << format_double(row.mean_kl) << ',' << row.n_trials << ',' << row.n_unconverged << "\n";
    unconverged += row.n_unconverged;
  }
  write_output(a.out, csv.str(), out);
  for (const auto& [n, beta] : res.argmin) {
    err << "N " << n << ": argmin beta " << format_double(beta) << " (1/(2 sqrt N) = "
        << format_double(0.5 / std::sqrt(static_cast<double>(n))) << ")\n";
  }
  if (!res.grid_covers_recommended_span) {
    err << "warning: beta grid does not span [1/(8 sqrt N), 4/sqrt N] for every N\n";
  }
  return unconverged == 0 ? kOk : kNotConverged;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const VerifyOptions& opt, std::ostream& out) {
  const VerifyReport report = run_verification(opt);
  for (const auto& c : report.checks) {
    out << (c.passed() ? "PASS " : "FAIL ") << c.name << ": " << c.cases << " cases, "
        << c.failures.size() << " failures";
    if (c.unconverged) out << ", " << c.unconverged << " unconverged";
    if (c.cases) out << "; " << c.worst_label << " " << format_double(c.worst);
    out << "\n";
    for (const auto& f : c.failures) {
      out << "  case " << f.case_id << " seed " << f.seed << ": " << f.detail << "\n";
    }
  }
  if (report.passed()) return kOk;
  return report.any_unconverged() ? kNotConverged : kVerifyFailed;
}

// ---- classical --------------------------------------------------------------

struct ClassicalArgs {
  std::vector<std::uint64_t> counts;
  std::vector<double> p;
  std::vector<double> q;
  double beta = HedgingParameter::kDefault;
  std::size_t symbols = 1000;
  std::uint64_t seed = 0;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum state estimation with hedged maximum likelihood", "hedge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hedge 0.1.0");

  const std::vector<std::string> methods{"mle", "hmle", "linear"};
  const std::vector<std::string> solvers{"newton", "diluted"};
  std::function<int()> action;

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a state from a measurement record");
  estimate->add_option("record", est.record, "Measurement record (JSON)")->required();
  estimate->add_option("--method", est.method, "mle, hmle or linear")
      ->check(CLI::IsMember(methods))
      ->capture_default_str();
  estimate->add_option("--beta", est.beta, "Hedging strength (> 0)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  estimate->add_option("--tol", est.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  estimate->add_option("--max-iter", est.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  estimate->add_option("--solver", est.solver, "newton or diluted")
      ->check(CLI::IsMember(solvers))
      ->capture_default_str();
  estimate->add_option("--out", est.out, "Write the estimate (JSON) here");
  estimate->callback([&] { action = [&] { return cmd_estimate(est, out); }; });

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate Pauli measurements of a qubit");
  auto* bloch_opt = simulate->add_option("--bloch", sim.bloch, "Bloch vector x,y,z")->delimiter(',');
  auto* state_opt = simulate->add_option("--state", sim.state, "True state (JSON)");
  bloch_opt->excludes(state_opt);
  simulate->add_option("--shots-per-basis", sim.shots, "Shots per Pauli basis")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--out", sim.out, "Output record (JSON); stdout if omitted");
  simulate->callback([&] {
    if (!bloch_opt->count() && !state_opt->count()) throw CLI::RequiredError("--bloch or --state");
    action = [&] { return cmd_simulate(sim, out); };
  });

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo accuracy sweep over random qubit states");
  sweep->add_option("--config", sw.config, "Experiment config or sweep sidecar (JSON)");
  sweep->add_option("--n-states", sw.n_states)->check(CLI::PositiveNumber);
  sweep->add_option("--n-datasets", sw.n_datasets)->check(CLI::PositiveNumber);
  sweep->add_option("--shots-per-basis", sw.shots)->check(CLI::PositiveNumber);
  sweep->add_option("--betas", sw.betas, "Comma-separated hedging strengths")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep->add_option("--estimators", sw.estimators, "Comma-separated: mle,hmle,linear")
      ->delimiter(',')
      ->check(CLI::IsMember(methods));
  sweep->add_option("--metrics", sw.metrics, "Comma-separated: kl,infidelity,trace,hs")
      ->delimiter(',')
      ->check(CLI::IsMember({"kl", "infidelity", "trace", "hs"}));
  sweep->add_option("--seed", sw.seed, "Master seed (required unless in --config)");
  sweep->add_option("--max-iter", sw.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber);
  sweep->add_option("--solver", sw.solver, "newton or diluted")->check(CLI::IsMember(solvers));
  sweep->add_option("--threads", sw.threads, "Worker threads (0 = all cores)");
  sweep->add_option("--bins", sw.bins, "Radial bins in the printed summary")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--out", sw.out, "Output CSV; the sidecar goes to <out>.json")->required();
  sweep->callback([&] { action = [&] { return cmd_sweep(sw, *sweep, out, err); }; });

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan-beta", "Mean KL error of HMLE on pure states versus beta");
  scan->add_option("--shots-grid", sc.shots_grid, "Comma-separated shots per basis")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* scan_betas = scan->add_option("--betas", sc.betas, "Explicit beta grid")
                         ->delimiter(',')
                         ->check(CLI::PositiveNumber);
  scan->add_option("--beta-min", sc.beta_min)->check(CLI::PositiveNumber)->excludes(scan_betas)->capture_default_str();
  scan->add_option("--beta-max", sc.beta_max)->check(CLI::PositiveNumber)->excludes(scan_betas)->capture_default_str();
  scan->add_option("--beta-points", sc.beta_points)->check(CLI::PositiveNumber)->excludes(scan_betas)->capture_default_str();
  scan->add_option("--n-states", sc.n_states)->check(CLI::PositiveNumber)->capture_default_str();
  scan->add_option("--n-datasets", sc.n_datasets)->check(CLI::PositiveNumber)->capture_default_str();
  scan->add_option("--seed", sc.seed, "Master seed")->required();
  scan->add_option("--threads", sc.threads, "Worker threads (0 = all cores)");
  scan->add_option("--out", sc.out, "Output CSV; stdout if omitted");
  scan->callback([&] { action = [&] { return cmd_scan_beta(sc, out, err); }; });

  VerifyOptions vo;
  std::optional<int> verify_max_iter;
  auto* verify = app.add_subcommand("verify", "Run the self-check suite");
  verify->add_option("--trials", vo.trials, "Random qubit trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--seed", vo.seed, "Master seed")->required();
  verify->add_option("--beta", vo.beta, "Hedging strength (> 0)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--shots-per-basis", vo.shots_per_basis)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--max-iter", verify_max_iter, "Solver iteration cap")
      ->check(CLI::PositiveNumber);
  verify->callback([&] {
    if (verify_max_iter) vo.solver.max_iter = *verify_max_iter;
    action = [&] { return cmd_verify(vo, out); };
  });

  ClassicalArgs ca;
  auto* classical = app.add_subcommand("classical", "Classical categorical estimators");
  classical->require_subcommand(1);
  auto* c_mle = classical->add_subcommand("mle", "n_k / N");
  c_mle->add_option("--counts", ca.counts)->delimiter(',')->required();
  c_mle->callback([&] {
    action = [&] {
      const auto p = classical::classical_mle(classical::CountVector(ca.counts));
      out << join({p.probs().begin(), p.probs().end()}) << "\n";
      return kOk;
    };
  });
  auto* c_lid = classical->add_subcommand("lidstone", "(n_k + beta) / (N + K beta)");
  c_lid->add_option("--counts", ca.counts)->delimiter(',')->required();
  c_lid->add_option("--beta", ca.beta)->check(CLI::PositiveNumber)->capture_default_str();
  c_lid->callback([&] {
    action = [&] {
      const auto p = classical::lidstone_estimate(classical::CountVector(ca.counts), ca.beta);
      out << join({p.probs().begin(), p.probs().end()}) << "\n";
      return kOk;
    };
  });
  auto* c_kl = classical->add_subcommand("kl", "D(p || q) in nats");
  c_kl->add_option("--p", ca.p)->delimiter(',')->required();
  c_kl->add_option("--q", ca.q)->delimiter(',')->required();
  c_kl->callback([&] {
    action = [&] {
      out << format_double(classical::kl_divergence(classical::ProbabilityVector(ca.p),
                                                    classical::ProbabilityVector(ca.q)))
          << "\n";
      return kOk;
    };
  });
  auto* c_ent = classical->add_subcommand("entropy", "Shannon entropy in nats");
  c_ent->add_option("--p", ca.p)->delimiter(',')->required();
  c_ent->callback([&] {
    action = [&] {
      out << format_double(classical::shannon_entropy(classical::ProbabilityVector(ca.p))) << "\n";
      return kOk;
    };
  });
  auto* c_exc = classical->add_subcommand("excess", "Per-symbol excess code length of p_hat");
  c_exc->add_option("--p-true", ca.p)->delimiter(',')->required();
  c_exc->add_option("--p-hat", ca.q)->delimiter(',')->required();
  c_exc->add_option("--symbols", ca.symbols, "Also simulate this many symbols")
      ->check(CLI::NonNegativeNumber);
  c_exc->add_option("--seed", ca.seed, "Seed for the simulation");
  c_exc->callback([&] {
    action = [&] {
      const classical::ProbabilityVector pt(ca.p);
      const classical::ProbabilityVector ph(ca.q);
      out << "expected " << format_double(classical::excess_predictive_cost(pt, ph)) << "\n";
      if (c_exc->count("--symbols") && ca.symbols > 0) {
        std::mt19937_64 rng(ca.seed);
        const auto r = classical::simulate_sequential_cost(pt, ph, ca.symbols, rng);
        out << "realized " << format_double(r.mean_excess) << " over " << r.symbols
            << " symbols\n";
      }
      return kOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const CLI::RequiredError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace hedge::cli
