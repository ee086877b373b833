#pragma once

// Classical categorical estimation: maximum likelihood, Lidstone's add-beta
// rule, hedged likelihoods, and the predictive costs used to score them.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hedge::classical {

/// Observed letter counts n_1..n_K (K >= 2). N = sum of counts may be 0.
class CountVector {
 public:
  explicit CountVector(std::vector<std::uint64_t> counts);

  std::size_t size() const { return counts_.size(); }
  std::uint64_t total() const { return total_; }
  std::uint64_t operator[](std::size_t k) const { return counts_[k]; }
  std::span<const std::uint64_t> counts() const { return counts_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Non-negative entries summing to 1 within 1e-12.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// n_k / N. Throws std::invalid_argument when N = 0.
ProbabilityVector classical_mle(const CountVector& c);

/// (n_k + beta) / (N + K beta). N = 0 gives the uniform vector.
ProbabilityVector lidstone_estimate(const CountVector& c, double beta);

/// sum_k n_k ln p_k, with 0 ln 0 = 0. -inf when an observed letter has p_k = 0.
double classical_log_likelihood(const ProbabilityVector& p, const CountVector& c);

/// sum_k (n_k + beta) ln p_k: the likelihood after adding beta dummy
/// observations of every letter. This is the product form prod p_k^(n_k+beta);
/// the alternative rearrangement with a prod n_k^beta prefactor is not the
/// function add-beta maximizes and is not used. -inf whenever any p_k = 0.
double classical_hedged_log_likelihood(const ProbabilityVector& p, const CountVector& c,
                                       double beta);

/// D(p || q) in nats. +inf iff some p_k > 0 has q_k = 0.
double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q);

/// H(p) = -sum p_k ln p_k in nats.
double shannon_entropy(const ProbabilityVector& p);

/// Per-symbol excess code length (or log-wealth deficit) of coding/betting
/// with p_hat when symbols are drawn from p_true. Equal to D(p_true || p_hat).
double excess_predictive_cost(const ProbabilityVector& p_true, const ProbabilityVector& p_hat);

struct SequentialCostResult {
  std::size_t symbols = 0;
  double mean_code_length = 0.0;    // -(1/n) sum ln p_hat(x_t), nats
  double mean_ideal_length = 0.0;   // -(1/n) sum ln p_true(x_t)
  double mean_excess = 0.0;         // difference of the two
};

/// Draws `n` i.i.d. symbols from p_true and accumulates the ideal code length
/// -ln p(x) under both distributions. The realized mean excess converges to
/// excess_predictive_cost(p_true, p_hat); it is +inf once a symbol with
/// p_hat = 0 is drawn.
SequentialCostResult simulate_sequential_cost(const ProbabilityVector& p_true,
                                              const ProbabilityVector& p_hat, std::size_t n,
                                              std::mt19937_64& rng);

}  // namespace hedge::classical
