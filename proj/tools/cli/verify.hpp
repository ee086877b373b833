#pragma once

// Packaged self-checks: the likelihood-ratio bound, the rank-deficiency
// property of MLE, the single-basis closed form, analytic gradients, and the
// qubit trace/Hilbert-Schmidt norm relation.

#include <cstdint>
#include <string>
#include <vector>

#include "hedge/estimators.hpp"

namespace hedge::cli {

struct VerifyOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double beta = 0.5;
  std::uint64_t shots_per_basis = 10;
  SolverConfig solver{};
};

struct CheckFailure {
  std::size_t case_id = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  std::string detail;
};

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t unconverged = 0;
  double worst = 0.0;  // worst observed value of the checked quantity
  std::string worst_label;
  std::vector<CheckFailure> failures;

  bool passed() const { return failures.empty() && unconverged == 0; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  bool any_unconverged() const;
};

VerifyReport run_verification(const VerifyOptions& opt);

}  // namespace hedge::cli
