#include "hedge/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(const Matrix& rho, const MeasurementRecord& rec, const char* what) {
  if (rho.rows() != rec.dim() || rho.cols() != rec.dim()) {
    std::ostringstream os;
    os << what << ": state has dimension " << rho.rows() << ", record has " << rec.dim();
    throw DimensionMismatch(os.str());
  }
}

// Tr[A B] for Hermitian A, B.
double trace_product(const Matrix& a, const Matrix& b) {
  return a.transpose().cwiseProduct(b).sum().real();
}

}  // namespace

HedgingParameter::HedgingParameter(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("HedgingParameter: beta must be positive and finite");
  }
}

MeasurementRecord::MeasurementRecord(std::vector<RecordItem> items) : items_(std::move(items)) {
  if (items_.empty()) throw std::invalid_argument("MeasurementRecord: no items");
  const Eigen::Index d = items_.front().effect.dim();
  Matrix weighted = Matrix::Zero(d, d);
  for (const auto& item : items_) {
    if (item.effect.dim() != d) throw DimensionMismatch("MeasurementRecord: mixed dimensions");
    if (!(item.weight > 0.0) || item.weight > 1.0) {
      throw std::invalid_argument("MeasurementRecord: weight outside (0, 1]");
    }
    weighted += item.weight * item.effect.matrix();
    total_ += item.count;
  }
  if ((weighted - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tolerance::kPovmSum) {
    throw std::invalid_argument(
        "MeasurementRecord: weighted effects do not sum to the identity");
  }
}

MeasurementRecord pool_measurements(const std::vector<MeasurementRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("pool_measurements: no runs");
  const Eigen::Index d = runs.front().povm.dim();
  std::uint64_t total = 0;
  std::vector<std::uint64_t> run_totals;
  run_totals.reserve(runs.size());
  for (const auto& run : runs) {
    if (run.povm.dim() != d) throw DimensionMismatch("pool_measurements: mixed dimensions");
    if (run.counts.size() != run.povm.size()) {
      throw std::invalid_argument("pool_measurements: counts length differs from POVM size");
    }
    std::uint64_t n = 0;
    for (auto c : run.counts) n += c;
    run_totals.push_back(n);
    total += n;
  }
  if (total == 0) throw std::invalid_argument("pool_measurements: all counts are zero");

  std::vector<RecordItem> items;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    if (run_totals[j] == 0) continue;
    const double w = static_cast<double>(run_totals[j]) / static_cast<double>(total);
    for (std::size_t i = 0; i < runs[j].povm.size(); ++i) {
      items.push_back(RecordItem{runs[j].povm[i], runs[j].counts[i], w});
    }
  }
  return MeasurementRecord(std::move(items));
}

double log_likelihood(const Matrix& rho, const MeasurementRecord& rec) {
  require_dim(rho, rec, "log_likelihood");
  double ll = 0.0;
  for (const auto& item : rec.items()) {
    if (item.count == 0) continue;
    const double p = trace_product(rho, item.effect.matrix());
    if (p < kZeroProbability) return -kInf;
    ll += static_cast<double>(item.count) * std::log(p);
  }
  return ll;
}

double log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec) {
  return log_likelihood(rho.matrix(), rec);
}

double pooled_log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec) {
  const double ll = log_likelihood(rho, rec);
  if (std::isinf(ll)) return ll;
  double shift = 0.0;
  for (const auto& item : rec.items()) {
    shift += static_cast<double>(item.count) * std::log(item.weight);
  }
  return ll + shift;
}

double hedged_log_likelihood(const DensityMatrix& rho, const MeasurementRecord& rec,
                             HedgingParameter beta) {
  const RealVector ev = rho.eigenvalues();
  const double floor = tolerance::kSupport * std::max(ev[0], 0.0);
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] <= floor) return -kInf;
    log_det += std::log(ev[k]);
  }
  const double ll = log_likelihood(rho, rec);
  return ll + beta.value() * log_det;
}

Matrix likelihood_gradient(const Matrix& rho, const MeasurementRecord& rec) {
  require_dim(rho, rec, "likelihood_gradient");
  const Eigen::Index d = rec.dim();
  Matrix r = Matrix::Zero(d, d);
  for (const auto& item : rec.items()) {
    if (item.count == 0) continue;
    const double p = trace_product(rho, item.effect.matrix());
    if (p < kZeroProbability) {
      throw std::domain_error("likelihood_gradient: observed outcome has zero probability");
    }
    r += (static_cast<double>(item.count) / p) * item.effect.matrix();
  }
  return r;
}

Matrix likelihood_gradient(const DensityMatrix& rho, const MeasurementRecord& rec) {
  return likelihood_gradient(rho.matrix(), rec);
}

Matrix hedging_gradient(const Matrix& rho, HedgingParameter beta) {
  const EigenDecomposition e = eig_hermitian(rho);
  if (!(e.values.minCoeff() > 1e-12)) {
    throw std::domain_error("hedging_gradient: state is singular");
  }
  return spectral_map(e, [b = beta.value()](double l) { return b / l; });
}

Matrix hedging_gradient(const DensityMatrix& rho, HedgingParameter beta) {
  return hedging_gradient(rho.matrix(), beta);
}

}  // namespace hedge
