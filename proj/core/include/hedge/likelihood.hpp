#pragma once

// Measurement records and the (hedged) quantum log-likelihood with its
// matrix gradients.

#include <cstdint>
#include <utility>
#include <vector>

#include "hedge/qstate.hpp"

namespace hedge {

/// Hedging strength beta > 0 of the hedging factor det(rho)^beta.
class HedgingParameter {
 public:
  static constexpr double kDefault = 0.5;

  HedgingParameter() = default;
  explicit HedgingParameter(double beta);

  double value() const { return beta_; }

 private:
  double beta_ = kDefault;
};

struct RecordItem {
  Effect effect;
  std::uint64_t count = 0;
  double weight = 1.0;  // N_j / N of the sub-measurement this effect came from
};

/// Pooled measurement data: effects with observed counts and the weight of
/// the sub-measurement each came from. The weighted effects must sum to the
/// identity within 1e-10. The likelihood depends only on (effect, count);
/// weights are kept for linear inversion and for bookkeeping.
class MeasurementRecord {
 public:
  explicit MeasurementRecord(std::vector<RecordItem> items);

  Eigen::Index dim() const { return items_.front().effect.dim(); }
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return items_.size(); }
  const std::vector<RecordItem>& items() const { return items_; }
  const RecordItem& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::vector<RecordItem> items_;
  std::uint64_t total_ = 0;
};

/// One sub-measurement: a POVM and the counts it produced.
struct MeasurementRun {
  Povm povm;
  std::vector<std::uint64_t> counts;
};

/// Pools several runs into one record with weights w_j = N_j / N.
/// Throws on empty input, mismatched dimensions or lengths, or N = 0.
/// Runs that recorded no shots carry no information and are dropped.
MeasurementRecord pool_measurements(const std::vector<MeasurementRun>& runs);

/// Probability below which an observed outcome makes the likelihood vanish.
inline constexpr double kZeroProbability = 1e-15;

/// sum_i n_i ln Tr[rho E_i]; -inf when an observed outcome has probability
/// below 1e-15.
double log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec);
double log_likelihood(const Matrix& rho, const MeasurementRecord& rec);

/// sum_i n_i ln(w_j(i) Tr[rho E_i]): the likelihood of the pooled POVM with
/// weighted effects. Differs from log_likelihood by a rho-independent constant.
double pooled_log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec);

/// log_likelihood + beta ln det rho; -inf for rank-deficient rho.
double hedged_log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec,
                             HedgingParameter beta);

/// R(rho) = sum_i n_i E_i / Tr[rho E_i]. Satisfies Tr[R rho] = N.
/// Throws std::domain_error when an observed outcome has probability < 1e-15.
Matrix likelihood_gradient(const Matrix& rho, const MeasurementRecord& rec);
Matrix likelihood_gradient(const DensityMatrix& rho, const MeasurementRecord& rec);

/// beta rho^{-1}, the gradient of beta ln det rho. Throws std::domain_error
/// if the smallest eigenvalue is not above 1e-12.
Matrix hedging_gradient(const Matrix& rho, HedgingParameter beta);
Matrix hedging_gradient(const DensityMatrix& rho, HedgingParameter beta);

}  // namespace hedge
