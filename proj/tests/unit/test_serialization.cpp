#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "hedge/serialization.hpp"

using namespace hedge;
using namespace hedge::io;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("doubles round trip exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const double x = u(rng) * std::pow(10.0, t % 40 - 20);
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
  CHECK(parse_double("inf") == kInf);
  CHECK(parse_double(format_double(0.1)) == 0.1);
  CHECK_THROWS(parse_double("0.5x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("matrix JSON") {
  Matrix m(2, 2);
  m << Complex(0.25, 0), Complex(0.1, -0.2), Complex(0.1, 0.2), Complex(0.75, 0);
  const Json j = matrix_to_json(m);
  CHECK(j["dim"] == 2);
  CHECK(j["entries"].size() == 8);
  CHECK(j["entries"][2] == 0.1);
  CHECK(j["entries"][3] == -0.2);
  CHECK(matrix_from_json(j) == m);

  const DensityMatrix rho(m);
  CHECK(density_from_json(to_json(rho)).matrix() == rho.matrix());

  Json bad = j;
  bad["entries"].erase(0);
  CHECK(error_of([&] { matrix_from_json(bad); }).find("/entries") != std::string::npos);
  bad = j;
  bad.erase("dim");
  CHECK(error_of([&] { matrix_from_json(bad); }).find("/dim") != std::string::npos);
  bad = j;
  bad["entries"][0] = 3.0;
  CHECK_THROWS(density_from_json(bad));
}

TEST_CASE("POVM and record JSON") {
  const Povm z = Povm::computational_basis(3);
  const Povm back = povm_from_json(to_json(z));
  REQUIRE(back.size() == 3);
  CHECK(back[1].matrix() == z[1].matrix());

  const auto rec = pool_measurements({{Povm::computational_basis(2), {3, 1}},
                                      {Povm::computational_basis(2), {0, 4}}});
  const Json j = to_json(rec);
  CHECK(j["items"].size() == 4);
  CHECK(j["items"][1]["count"] == 1);
  const auto parsed = record_from_json(j);
  REQUIRE(parsed.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(parsed[i].count == rec[i].count);
    CHECK(parsed[i].weight == rec[i].weight);
    CHECK(parsed[i].effect.matrix() == rec[i].effect.matrix());
  }

  Json bad = j;
  bad["items"][2]["count"] = -1;
  CHECK(error_of([&] { record_from_json(bad); }).find("/items/2/count") != std::string::npos);
}

TEST_CASE("estimate JSON carries diagnostics") {
  const auto rec = pool_measurements({{Povm::computational_basis(2), {10, 0}}});
  const auto est = hmle(rec, HedgingParameter(0.5));
  const Json j = estimate_to_json(est);
  CHECK(j["dim"] == 2);
  for (const char* key : {"iterations", "converged", "final_objective", "min_eigenvalue"}) {
    CHECK(j["diagnostics"].contains(key));
  }
  CHECK(density_from_json(j).matrix() == est.state.matrix());
}

TEST_CASE("experiment config JSON round trip") {
  mc::ExperimentConfig cfg;
  cfg.n_states = 7;
  cfg.betas = {0.02, 0.3};
  cfg.estimators = {mc::EstimatorKind::linear};
  cfg.metrics = {mc::Metric::trace};
  cfg.master_seed = 0xFFFFFFFFFFFFFFFFull;
  cfg.solver.method = SolverMethod::diluted;
  cfg.solver.tol = 1e-12;
  const auto back = experiment_config_from_json(to_json(cfg));
  CHECK(back.n_states == 7);
  CHECK(back.betas == cfg.betas);
  CHECK(back.estimators == cfg.estimators);
  CHECK(back.metrics == cfg.metrics);
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.solver.method == SolverMethod::diluted);
  CHECK(back.solver.tol == 1e-12);
  CHECK(to_json(back) == to_json(cfg));

  Json bad = to_json(cfg);
  bad["solver"]["method"] = "simplex";
  CHECK(error_of([&] { experiment_config_from_json(bad); }).find("/solver/method") != std::string::npos);
}

TEST_CASE("sweep CSV round trip") {
  mc::ExperimentConfig cfg;
  cfg.n_states = 3;
  cfg.n_datasets = 4;
  cfg.shots_per_basis = 5;
  cfg.master_seed = 11;
  const auto report = mc::run_sweep(cfg);
  const auto rows = csv_rows(report);
  const std::string text = write_sweep_csv(rows);
  CHECK(text.rfind(std::string(kSweepCsvHeader) + "\n", 0) == 0);
  const auto parsed = parse_sweep_csv(text);
  REQUIRE(parsed.size() == rows.size());
  CHECK(write_sweep_csv(parsed) == text);
  bool saw_inf = false;
  for (const auto& r : parsed) saw_inf = saw_inf || std::isinf(r.mean_error);
  CHECK(saw_inf);
  CHECK(text.find(",inf,") != std::string::npos);

  const Json sidecar = sweep_sidecar(report);
  CHECK(experiment_config_from_json(sidecar["config"]).master_seed == 11);

  CHECK_THROWS_AS(parse_sweep_csv("state_id,wrong\n"), FormatError);
  std::string broken = text;
  broken.insert(broken.find('\n') + 1, "0,1,2\n");
  CHECK(error_of([&] { parse_sweep_csv(broken); }).find("line 2") != std::string::npos);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "hedge_serialization_test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.json", "{\n  \"dim\": 2,\n  \"entries\": [1, 0,\n}");
  const std::string err = error_of([&] { read_json_file(dir / "a.json"); });
  CHECK(err.find("line") != std::string::npos);
  write_text_file(dir / "b.txt", "hello");
  CHECK(read_text_file(dir / "b.txt") == "hello");
  CHECK_THROWS(read_text_file(dir / "missing.txt"));
  std::filesystem::remove_all(dir);
}
