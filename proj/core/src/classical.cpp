#include "hedge/classical.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hedge::classical {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

void require_positive_beta(double beta, const char* what) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument(std::string(what) + ": beta must be positive and finite");
  }
}

}  // namespace

CountVector::CountVector(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw std::invalid_argument("CountVector: need at least two letters");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("ProbabilityVector: empty");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("ProbabilityVector: negative or NaN entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("ProbabilityVector: entries do not sum to 1");
  }
}

ProbabilityVector classical_mle(const CountVector& c) {
  if (c.total() == 0) throw std::invalid_argument("classical_mle: no observations");
  const double n = static_cast<double>(c.total());
  std::vector<double> p(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) p[k] = static_cast<double>(c[k]) / n;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector lidstone_estimate(const CountVector& c, double beta) {
  require_positive_beta(beta, "lidstone_estimate");
  const double denom = static_cast<double>(c.total()) + static_cast<double>(c.size()) * beta;
  std::vector<double> p(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) p[k] = (static_cast<double>(c[k]) + beta) / denom;
  return ProbabilityVector(std::move(p));
}

double classical_log_likelihood(const ProbabilityVector& p, const CountVector& c) {
  require_same_length(p.size(), c.size(), "classical_log_likelihood");
  double ll = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (c[k] == 0) continue;
    if (p[k] == 0.0) return -kInf;
    ll += static_cast<double>(c[k]) * std::log(p[k]);
  }
  return ll;
}

double classical_hedged_log_likelihood(const ProbabilityVector& p, const CountVector& c,
                                       double beta) {
  require_same_length(p.size(), c.size(), "classical_hedged_log_likelihood");
  require_positive_beta(beta, "classical_hedged_log_likelihood");
  double ll = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) return -kInf;
    ll += (static_cast<double>(c[k]) + beta) * std::log(p[k]);
  }
  return ll;
}

double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q) {
  require_same_length(p.size(), q.size(), "kl_divergence");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return kInf;
    d += p[k] * (std::log(p[k]) - std::log(q[k]));
  }
  return std::max(0.0, d);
}

double shannon_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (double pk : p.probs()) {
    if (pk > 0.0) h -= pk * std::log(pk);
  }
  return h;
}

double excess_predictive_cost(const ProbabilityVector& p_true, const ProbabilityVector& p_hat) {
  return kl_divergence(p_true, p_hat);
}

SequentialCostResult simulate_sequential_cost(const ProbabilityVector& p_true,
                                              const ProbabilityVector& p_hat, std::size_t n,
                                              std::mt19937_64& rng) {
  require_same_length(p_true.size(), p_hat.size(), "simulate_sequential_cost");
  if (n == 0) throw std::invalid_argument("simulate_sequential_cost: need at least one symbol");
  std::discrete_distribution<std::size_t> source(p_true.probs().begin(), p_true.probs().end());
  double coded = 0.0;
  double ideal = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t x = source(rng);
    coded += p_hat[x] > 0.0 ? -std::log(p_hat[x]) : kInf;
    ideal -= std::log(p_true[x]);
  }
  SequentialCostResult out;
  out.symbols = n;
  out.mean_code_length = coded / static_cast<double>(n);
  out.mean_ideal_length = ideal / static_cast<double>(n);
  out.mean_excess = std::isinf(coded) ? kInf : out.mean_code_length - out.mean_ideal_length;
  return out;
}

}  // namespace hedge::classical
