#include "pois/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pois {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest log weight, validating the batch on the way: log weights live in
// [-inf, inf) and at least one must be finite for normalization to exist.
double checked_max_log_weight(std::span<const WeightedSample> samples) {
  if (samples.empty())
    throw std::invalid_argument("estimators: empty sample batch");
  double m = -kInf;
  for (const auto& s : samples) {
    if (std::isnan(s.log_weight) || s.log_weight == kInf)
      throw std::domain_error("estimators: log weight is NaN or +inf");
    m = std::max(m, s.log_weight);
  }
  if (m == -kInf)
    throw std::domain_error("estimators: all weights are zero");
  return m;
}

}  // namespace

BoundConfig::BoundConfig(double delta_, double f_inf_, int n_)
    : delta(delta_), f_inf(f_inf_), n(n_) {
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("BoundConfig: delta must be in (0, 1)");
  if (!(f_inf >= 0.0))
    throw std::invalid_argument("BoundConfig: f_inf must be >= 0");
  if (n < 1) throw std::invalid_argument("BoundConfig: n must be >= 1");
}

double is_estimate(std::span<const WeightedSample> samples) {
  if (samples.empty())
    throw std::invalid_argument("is_estimate: empty sample batch");
  double acc = 0.0;
  for (const auto& s : samples) {
    if (std::isnan(s.log_weight) || s.log_weight == kInf)
      throw std::domain_error("estimators: log weight is NaN or +inf");
    acc += std::exp(s.log_weight) * s.value;
  }
  return acc / static_cast<double>(samples.size());
}

double sn_estimate(std::span<const WeightedSample> samples) {
  const double m = checked_max_log_weight(samples);
  double num = 0.0, den = 0.0;
  for (const auto& s : samples) {
    const double w = std::exp(s.log_weight - m);
    num += w * s.value;
    den += w;
  }
  return num / den;
}

double ess_exact(int n, double d2) {
  if (n < 1) throw std::invalid_argument("ess_exact: n must be >= 1");
  if (!(d2 >= 1.0)) throw std::invalid_argument("ess_exact: d2 must be >= 1");
  return static_cast<double>(n) / d2;
}

double ess_estimate(std::span<const WeightedSample> samples) {
  const double m = checked_max_log_weight(samples);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& s : samples) {
    const double w = std::exp(s.log_weight - m);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

double weight_variance(std::span<const WeightedSample> samples) {
  if (samples.empty())
    throw std::invalid_argument("weight_variance: empty sample batch");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const auto& s : samples) mean += std::exp(s.log_weight);
  mean /= n;
  double var = 0.0;
  for (const auto& s : samples) {
    const double d = std::exp(s.log_weight) - mean;
    var += d * d;
  }
  return var / n;
}

double is_variance_bound(const BoundConfig& cfg, double d2) {
  if (!(d2 >= 1.0))
    throw std::invalid_argument("is_variance_bound: d2 must be >= 1");
  return cfg.f_inf * cfg.f_inf * d2 / static_cast<double>(cfg.n);
}

double lambda_from_delta(const BoundConfig& cfg) {
  return cfg.f_inf * std::sqrt((1.0 - cfg.delta) / cfg.delta);
}

double is_lower_bound(double point_estimate, const BoundConfig& cfg,
                      double d2) {
  if (!(d2 >= 1.0))
    throw std::invalid_argument("is_lower_bound: d2 must be >= 1");
  return point_estimate -
         cfg.f_inf * std::sqrt((1.0 - cfg.delta) * d2 /
                               (cfg.delta * static_cast<double>(cfg.n)));
}

double sn_bias_bound(const BoundConfig& cfg, double d2) {
  if (!(d2 >= 1.0))
    throw std::invalid_argument("sn_bias_bound: d2 must be >= 1");
  return cfg.f_inf *
         std::min(2.0, std::sqrt((d2 - 1.0) / static_cast<double>(cfg.n)));
}

double sn_mse_bound(const BoundConfig& cfg, double d2) {
  if (!(d2 >= 1.0))
    throw std::invalid_argument("sn_mse_bound: d2 must be >= 1");
  return 2.0 * cfg.f_inf * cfg.f_inf *
         std::min(2.0, (2.0 * d2 - 1.0) / static_cast<double>(cfg.n));
}

double sn_lower_bound(double point_estimate, const BoundConfig& cfg,
                      double d2) {
  if (!(d2 >= 1.0))
    throw std::invalid_argument("sn_lower_bound: d2 must be >= 1");
  const double radius = std::sqrt(d2 * (4.0 - 3.0 * cfg.delta) /
                                  (cfg.delta * static_cast<double>(cfg.n)));
  return point_estimate - 2.0 * cfg.f_inf * std::min(1.0, radius);
}

}  // namespace pois
