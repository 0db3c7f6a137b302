#include "pois/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pois {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard normal cdf via erfc, accurate in both tails.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

void check_same_dim(const DiagGaussian& p, const DiagGaussian& q) {
  if (p.dim() != q.dim())
    throw std::invalid_argument("renyi_divergence: dimension mismatch");
}

}  // namespace

DiagGaussian::DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd log_std)
    : mean_(std::move(mean)), log_std_(std::move(log_std)) {
  if (mean_.size() != log_std_.size())
    throw std::invalid_argument("DiagGaussian: mean/log_std size mismatch");
  if (mean_.size() == 0)
    throw std::invalid_argument("DiagGaussian: empty parameter vectors");
}

double DiagGaussian::log_pdf(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size())
    throw std::invalid_argument("DiagGaussian::log_pdf: dimension mismatch");
  const Eigen::ArrayXd z =
      (x - mean_).array() * (-log_std_.array()).exp();  // (x - mu) / sigma
  return -0.5 * z.square().sum() - log_std_.sum() -
         0.5 * kLog2Pi * static_cast<double>(dim());
}

Eigen::VectorXd DiagGaussian::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> unit;
  Eigen::VectorXd x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = unit(rng);
  return mean_ + (log_std_.array().exp() * x.array()).matrix();
}

std::optional<double> renyi_divergence(double alpha, const DiagGaussian& p,
                                       const DiagGaussian& q) {
  check_same_dim(p, q);
  if (!(alpha >= 0.0))
    throw std::invalid_argument("renyi_divergence: alpha must be >= 0");

  const Eigen::ArrayXd var_p = p.variance().array();
  const Eigen::ArrayXd var_q = q.variance().array();
  const Eigen::ArrayXd dmu = (p.mean() - q.mean()).array();

  if (alpha == 1.0) {  // KL limit
    const double kl =
        (q.log_std() - p.log_std()).sum() +
        0.5 * ((var_p + dmu.square()) / var_q).sum() - 0.5 * p.dim();
    return kl;
  }

  // Mixture variance alpha * var_q + (1 - alpha) * var_p must stay positive.
  const Eigen::ArrayXd var_mix = alpha * var_q + (1.0 - alpha) * var_p;
  if ((var_mix <= 0.0).any()) return std::nullopt;

  const double mean_term = 0.5 * alpha * (dmu.square() / var_mix).sum();
  const double log_det_term =
      (var_mix.log() - (1.0 - alpha) * var_p.log() - alpha * var_q.log()).sum();
  return mean_term - log_det_term / (2.0 * (alpha - 1.0));
}

std::optional<double> exp_renyi_divergence(double alpha, const DiagGaussian& p,
                                           const DiagGaussian& q) {
  const auto d = renyi_divergence(alpha, p, q);
  if (!d) return std::nullopt;
  return std::exp(*d);
}

WeightLawParams WeightLawParams::from_univariate(double mu_p, double sigma_p,
                                                 double mu_q, double sigma_q) {
  if (!(sigma_p > 0.0) || !(sigma_q > 0.0))
    throw std::invalid_argument("WeightLawParams: sigmas must be positive");

  WeightLawParams law;
  const double dmu = mu_p - mu_q;
  if (sigma_p == sigma_q) {
    if (dmu == 0.0)
      throw std::domain_error(
          "WeightLawParams: p == q, weight is constant 1 (no density)");
    law.regime = WeightRegime::EqualVariance;
    law.mu_tilde = dmu / (2.0 * sigma_p);
    law.sigma_tilde = sigma_p / dmu;
    return law;
  }

  const double var_gap = sigma_q * sigma_q - sigma_p * sigma_p;  // sign splits regimes
  law.regime = var_gap > 0.0 ? WeightRegime::Bounded : WeightRegime::Unbounded;
  law.a = (sigma_q / sigma_p) * std::exp(0.5 * dmu * dmu / var_gap);
  law.mu_bar = sigma_q * dmu / var_gap;
  law.sigma_bar_sq = sigma_p * sigma_p / std::abs(var_gap);
  return law;
}

double WeightLawParams::pdf(double y) const {
  if (!(y > 0.0)) return 0.0;

  if (regime == WeightRegime::EqualVariance) {
    const double t = std::log(y);
    const double log_f = std::log(std::abs(sigma_tilde)) - 0.5 * kLog2Pi -
                         1.5 * t -
                         0.5 * (mu_tilde * mu_tilde +
                                sigma_tilde * sigma_tilde * t * t);
    return std::exp(log_f);
  }

  // Unequal variances: density in u = sqrt(|log(y/a)|), computed in log space
  // so the cosh factor cannot overflow deep in the tail.
  const double r = regime == WeightRegime::Bounded ? a / y : y / a;
  if (r < 1.0) return 0.0;  // outside the support
  const double u = std::sqrt(std::log(r));
  const double sigma_bar = std::sqrt(sigma_bar_sq);
  const double c = std::abs(M_SQRT2 * mu_bar * sigma_bar);
  // log cosh(c u) = c u - log 2 + log1p(exp(-2 c u))
  const double log_f = std::log(sigma_bar) - std::log(y) -
                       0.5 * std::log(M_PI) - std::log(u) -
                       0.5 * mu_bar * mu_bar - sigma_bar_sq * u * u + c * u +
                       std::log1p(std::exp(-2.0 * c * u)) - M_LN2;
  return std::exp(log_f);  // +inf exactly at the boundary (u = 0), integrable
}

double WeightLawParams::cdf(double y) const {
  if (!(y > 0.0)) return 0.0;

  if (regime == WeightRegime::EqualVariance) {
    // w is lognormal(-2 mu_tilde^2, 1 / sigma_tilde^2).
    return normal_cdf(std::abs(sigma_tilde) *
                      (std::log(y) + 2.0 * mu_tilde * mu_tilde));
  }

  const double sigma_bar = std::sqrt(sigma_bar_sq);
  if (regime == WeightRegime::Bounded) {
    if (y >= a) return 1.0;
    const double s = sigma_bar * std::sqrt(2.0 * std::log(a / y));
    return normal_cdf(mu_bar - s) + 1.0 - normal_cdf(mu_bar + s);
  }
  if (y <= a) return 0.0;
  const double s = sigma_bar * std::sqrt(2.0 * std::log(y / a));
  return normal_cdf(mu_bar + s) - normal_cdf(mu_bar - s);
}

WeightTailRegime weight_tail_regime(const WeightLawParams& law) {
  return law.regime == WeightRegime::Unbounded ? WeightTailRegime::FatTail
                                               : WeightTailRegime::AllMoments;
}

double critical_moment_order(const WeightLawParams& law) {
  if (law.regime != WeightRegime::Unbounded) return kInf;
  // sigma_p^2 / (sigma_p^2 - sigma_q^2), which equals sigma_bar_sq here.
  return law.sigma_bar_sq;
}

}  // namespace pois
