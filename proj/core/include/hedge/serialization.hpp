#pragma once

// File formats shared by the library and the command-line tool.
//
// Matrices are JSON objects {"dim": d, "entries": [re, im, re, im, ...]}
// holding the d*d entries in row-major order, each as an interleaved
// real/imaginary pair. Full schemas are in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hedge/estimators.hpp"
#include "hedge/likelihood.hpp"
#include "hedge/montecarlo.hpp"
#include "hedge/qstate.hpp"

namespace hedge::io {

using Json = nlohmann::json;

/// Input that does not match a schema. `what()` names the offending field
/// (as a JSON pointer) or the line of a CSV file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits, so the text parses back to exactly `x`.
/// Infinities print as `inf` / `-inf`.
std::string format_double(double x);
double parse_double(std::string_view s);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where = "");

Json to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const Json& j, const std::string& where = "");

/// {"dim": d, "effects": [<matrix>, ...]}
Json to_json(const Povm& povm);
Povm povm_from_json(const Json& j, const std::string& where = "");

/// {"dim": d, "items": [{"effect": <matrix>, "count": n, "weight": w}, ...]}
Json to_json(const MeasurementRecord& rec);
MeasurementRecord record_from_json(const Json& j);

/// {"iterations", "converged", "final_objective", "min_eigenvalue", ...}
Json to_json(const SolverDiagnostics& diag);

/// A density-matrix object with an extra "diagnostics" member.
Json estimate_to_json(const Estimate& est);

Json to_json(const mc::ExperimentConfig& cfg);
mc::ExperimentConfig experiment_config_from_json(const Json& j);

/// Sidecar written next to a sweep CSV: full config, seed, and check totals.
Json sweep_sidecar(const mc::SweepReport& report);

/// One line of the sweep CSV.
struct CsvRow {
  std::size_t state_id = 0;
  double bloch_x = 0.0;
  double bloch_y = 0.0;
  double bloch_z = 0.0;
  double r_sq = 0.0;
  std::uint64_t shots_per_basis = 0;
  std::string estimator;
  double beta = 0.0;
  std::string metric;
  double mean_error = 0.0;
  std::size_t n_finite = 0;
  std::size_t n_infinite = 0;
};

inline constexpr std::string_view kSweepCsvHeader =
    "state_id,bloch_x,bloch_y,bloch_z,r_sq,N,estimator,beta,metric,mean_error,n_finite,n_infinite";

std::vector<CsvRow> csv_rows(const mc::SweepReport& report);
std::string write_sweep_csv(const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_sweep_csv(std::string_view text);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hedge::io
