#pragma once

// Importance sampling estimators and the variance / confidence machinery
// built on the 2-Renyi divergence d_2 = E_q[w^2] between target and
// behavioral distributions.

#include <span>

namespace pois {

// One importance-weighted draw. Weights are carried in log space; log_weight
// may be -inf (a zero weight) but never NaN or +inf.
struct WeightedSample {
  double log_weight = 0.0;
  double value = 0.0;
};

// Shared inputs of the concentration bounds: confidence level delta in (0, 1),
// sup-norm bound f_inf >= 0 on the integrand, sample count n >= 1.
struct BoundConfig {
  BoundConfig(double delta, double f_inf, int n);
  double delta;
  double f_inf;
  int n;
};

// Plain importance sampling estimate (1/N) sum w_i f_i. Unbiased; weights are
// exponentiated as-is so the estimate keeps that property.
double is_estimate(std::span<const WeightedSample> samples);

// Self-normalized estimate sum w_i f_i / sum w_j. Biased but bounded by the
// range of f. Computed with max-log-weight shifting.
double sn_estimate(std::span<const WeightedSample> samples);

// Effective sample size N / d_2 given the exact divergence.
double ess_exact(int n, double d2);

// Empirical effective sample size 1 / sum(normalized weights squared), in
// [1, N]. Equals N exactly on-policy.
double ess_estimate(std::span<const WeightedSample> samples);

// Population variance of the raw weights (diagnostic; its mean under the
// behavioral distribution is d_2 - 1).
double weight_variance(std::span<const WeightedSample> samples);

// Variance bound for the IS estimate: f_inf^2 * d_2 / N.
double is_variance_bound(const BoundConfig& cfg, double d2);

// Penalty multiplier f_inf * sqrt((1 - delta) / delta).
double lambda_from_delta(const BoundConfig& cfg);

// High-confidence lower bound on E_p[f] from the IS point estimate:
//   point - f_inf * sqrt((1 - delta) d_2 / (delta N)),
// holding with probability at least 1 - delta.
double is_lower_bound(double point_estimate, const BoundConfig& cfg, double d2);

// Bias and MSE bounds for the self-normalized estimate.
double sn_bias_bound(const BoundConfig& cfg, double d2);
double sn_mse_bound(const BoundConfig& cfg, double d2);

// High-confidence lower bound from the self-normalized point estimate:
//   point - 2 f_inf * min{1, sqrt(d_2 (4 - 3 delta) / (delta N))}.
double sn_lower_bound(double point_estimate, const BoundConfig& cfg, double d2);

}  // namespace pois
