#include "hedge/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace hedge::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw FormatError((where.empty() ? std::string("/") : where) + ": " + msg);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where + "/" + key, "missing field");
  return *it;
}

std::uint64_t as_count(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

// Runs a domain constructor, re-raising its validation errors with a location.
template <typename Fn>
auto checked(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      entries.push_back(m(i, k).real());
      entries.push_back(m(i, k).imag());
    }
  }
  return Json{{"dim", m.rows()}, {"entries", std::move(entries)}};
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  const Json& dim_j = field(j, "dim", where);
  const auto dim = static_cast<Eigen::Index>(as_count(dim_j, where + "/dim"));
  if (dim < 1) fail(where + "/dim", "must be positive");
  const Json& entries = field(j, "entries", where);
  if (!entries.is_array()) fail(where + "/entries", "expected an array");
  if (entries.size() != static_cast<std::size_t>(2 * dim * dim)) {
    fail(where + "/entries", "expected " + std::to_string(2 * dim * dim) + " numbers (re, im pairs)");
  }
  Matrix m(dim, dim);
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double re = as_number(entries[at], where + "/entries/" + std::to_string(at));
      const double im = as_number(entries[at + 1], where + "/entries/" + std::to_string(at + 1));
      m(i, k) = Complex(re, im);
      at += 2;
    }
  }
  return m;
}

Json to_json(const DensityMatrix& rho) {
  return matrix_to_json(rho.matrix());
}

DensityMatrix density_from_json(const Json& j, const std::string& where) {
  const Matrix m = matrix_from_json(j, where);
  return checked(where, [&] { return DensityMatrix(m); });
}

Json to_json(const Povm& povm) {
  Json effects = Json::array();
  for (const auto& e : povm.effects()) effects.push_back(matrix_to_json(e.matrix()));
  return Json{{"dim", povm.dim()}, {"effects", std::move(effects)}};
}

Povm povm_from_json(const Json& j, const std::string& where) {
  const Json& effects = field(j, "effects", where);
  if (!effects.is_array() || effects.empty()) fail(where + "/effects", "expected a non-empty array");
  std::vector<Effect> out;
  for (std::size_t i = 0; i < effects.size(); ++i) {
    const std::string at = where + "/effects/" + std::to_string(i);
    const Matrix m = matrix_from_json(effects[i], at);
    out.push_back(checked(at, [&] { return Effect(m); }));
  }
  return checked(where, [&] { return Povm(std::move(out)); });
}

Json to_json(const MeasurementRecord& rec) {
  Json items = Json::array();
  for (const auto& item : rec.items()) {
    items.push_back(Json{{"effect", matrix_to_json(item.effect.matrix())},
                         {"count", item.count},
                         {"weight", item.weight}});
  }
  return Json{{"dim", rec.dim()}, {"items", std::move(items)}};
}

MeasurementRecord record_from_json(const Json& j) {
  const auto dim = static_cast<Eigen::Index>(as_count(field(j, "dim", ""), "/dim"));
  const Json& items = field(j, "items", "");
  if (!items.is_array() || items.empty()) fail("/items", "expected a non-empty array");
  std::vector<RecordItem> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string at = "/items/" + std::to_string(i);
    const Matrix m = matrix_from_json(field(items[i], "effect", at), at + "/effect");
    if (m.rows() != dim) fail(at + "/effect/dim", "differs from record dim");
    Effect e = checked(at + "/effect", [&] { return Effect(m); });
    const std::uint64_t count = as_count(field(items[i], "count", at), at + "/count");
    const double weight = as_number(field(items[i], "weight", at), at + "/weight");
    out.push_back(RecordItem{std::move(e), count, weight});
  }
  return checked("/items", [&] { return MeasurementRecord(std::move(out)); });
}

Json to_json(const SolverDiagnostics& diag) {
  return Json{{"iterations", diag.iterations},
              {"converged", diag.converged},
              {"final_objective", diag.final_objective},
              {"min_eigenvalue", diag.min_eigenvalue},
              {"stationarity", diag.stationarity},
              {"duality_gap", diag.duality_gap},
              {"degenerate", diag.degenerate}};
}

Json estimate_to_json(const Estimate& est) {
  Json j = to_json(est.state);
  j["diagnostics"] = to_json(est.diagnostics);
  return j;
}

Json to_json(const mc::ExperimentConfig& cfg) {
  Json estimators = Json::array();
  for (auto e : cfg.estimators) estimators.push_back(std::string(mc::to_string(e)));
  Json metrics = Json::array();
  for (auto m : cfg.metrics) metrics.push_back(std::string(mc::to_string(m)));
  return Json{{"n_states", cfg.n_states},
              {"n_datasets", cfg.n_datasets},
              {"shots_per_basis", cfg.shots_per_basis},
              {"betas", cfg.betas},
              {"estimators", std::move(estimators)},
              {"metrics", std::move(metrics)},
              {"master_seed", cfg.master_seed},
              {"solver",
               {{"method", std::string(to_string(cfg.solver.method))},
                {"tol", cfg.solver.tol},
                {"max_iter", cfg.solver.max_iter},
                {"gap_tol", cfg.solver.gap_tol},
                {"stationarity_tol", cfg.solver.stationarity_tol}}}};
}

mc::ExperimentConfig experiment_config_from_json(const Json& j) {
  mc::ExperimentConfig cfg;
  cfg.n_states = as_count(field(j, "n_states", ""), "/n_states");
  cfg.n_datasets = as_count(field(j, "n_datasets", ""), "/n_datasets");
  cfg.shots_per_basis = as_count(field(j, "shots_per_basis", ""), "/shots_per_basis");
  cfg.master_seed = as_count(field(j, "master_seed", ""), "/master_seed");
  const Json& betas = field(j, "betas", "");
  if (!betas.is_array()) fail("/betas", "expected an array");
  cfg.betas.clear();
  for (std::size_t i = 0; i < betas.size(); ++i) {
    cfg.betas.push_back(as_number(betas[i], "/betas/" + std::to_string(i)));
  }
  auto names = [&](const char* key) {
    const Json& arr = field(j, key, "");
    if (!arr.is_array()) fail(std::string("/") + key, "expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) fail(std::string("/") + key + "/" + std::to_string(i), "expected a string");
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  };
  cfg.estimators.clear();
  for (const auto& s : names("estimators")) {
    cfg.estimators.push_back(checked("/estimators", [&] { return mc::parse_estimator(s); }));
  }
  cfg.metrics.clear();
  for (const auto& s : names("metrics")) {
    cfg.metrics.push_back(checked("/metrics", [&] { return mc::parse_metric(s); }));
  }
  if (auto it = j.find("solver"); it != j.end()) {
    const Json& s = *it;
    if (s.contains("method")) {
      if (!s["method"].is_string()) fail("/solver/method", "expected a string");
      cfg.solver.method =
          checked("/solver/method", [&] { return parse_solver_method(s["method"].get<std::string>()); });
    }
    if (s.contains("tol")) cfg.solver.tol = as_number(s["tol"], "/solver/tol");
    if (s.contains("max_iter")) {
      cfg.solver.max_iter = static_cast<int>(as_count(s["max_iter"], "/solver/max_iter"));
    }
    if (s.contains("gap_tol")) cfg.solver.gap_tol = as_number(s["gap_tol"], "/solver/gap_tol");
    if (s.contains("stationarity_tol")) {
      cfg.solver.stationarity_tol = as_number(s["stationarity_tol"], "/solver/stationarity_tol");
    }
  }
  checked("/", [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

Json sweep_sidecar(const mc::SweepReport& report) {
  Json violations = Json::array();
  for (const auto& v : report.violations) {
    violations.push_back(Json{{"kind", v.kind},
                              {"state_id", v.state_id},
                              {"dataset_id", v.dataset_id},
                              {"beta", v.beta},
                              {"value", format_double(v.value)},
                              {"seed", v.seed}});
  }
  return Json{{"config", to_json(report.config)},
              {"master_seed", report.config.master_seed},
              {"regime_boundary", report.regime_boundary},
              {"checks_run", report.checks_run},
              {"violations", std::move(violations)},
              {"solver_failures", report.solver_failures.size()}};
}

std::vector<CsvRow> csv_rows(const mc::SweepReport& report) {
  std::vector<CsvRow> out;
  out.reserve(report.rows.size());
  for (const auto& row : report.rows) {
    const auto& st = report.states[row.state_id];
    out.push_back(CsvRow{row.state_id, st.bloch.x, st.bloch.y, st.bloch.z, st.r_sq,
                         report.config.shots_per_basis, std::string(mc::to_string(row.estimator)),
                         row.beta, std::string(mc::to_string(row.metric)), row.mean_error,
                         row.n_finite, row.n_infinite});
  }
  return out;
}

std::string write_sweep_csv(const std::vector<CsvRow>& rows) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.state_id);
    for (double v : {r.bloch_x, r.bloch_y, r.bloch_z, r.r_sq}) {
      out += ',';
      out += format_double(v);
    }
    out += ',' + std::to_string(r.shots_per_basis) + ',' + r.estimator + ',' + format_double(r.beta) +
           ',' + r.metric + ',' + format_double(r.mean_error) + ',' + std::to_string(r.n_finite) +
           ',' + std::to_string(r.n_infinite) + '\n';
  }
  return out;
}

std::vector<CsvRow> parse_sweep_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kSweepCsvHeader) throw FormatError("line 1: unexpected CSV header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 12) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 12 columns, got " +
                        std::to_string(cols.size()));
    }
    try {
      CsvRow r;
      r.state_id = parse_int<std::size_t>(cols[0]);
      r.bloch_x = parse_double(cols[1]);
      r.bloch_y = parse_double(cols[2]);
      r.bloch_z = parse_double(cols[3]);
      r.r_sq = parse_double(cols[4]);
      r.shots_per_basis = parse_int<std::uint64_t>(cols[5]);
      r.estimator = std::string(cols[6]);
      r.beta = parse_double(cols[7]);
      r.metric = std::string(cols[8]);
      r.mean_error = parse_double(cols[9]);
      r.n_finite = parse_int<std::size_t>(cols[10]);
      r.n_infinite = parse_int<std::size_t>(cols[11]);
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw FormatError("line 1: empty CSV");
  return rows;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a line number for the diagnostic.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n' ? 1 : 0;
    throw FormatError(path.string() + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace hedge::io
