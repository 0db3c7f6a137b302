#pragma once

// Diagonal Gaussians, Renyi divergences between them, and the analytic
// distribution of the importance weight w(x) = p(x)/q(x) for univariate
// Gaussian P and Q. The weight law is the ground truth the importance
// sampling diagnostics are tested against.

#include <Eigen/Core>

#include <optional>
#include <random>

namespace pois {

// N(mean, diag(exp(2 * log_std))). Standard deviations are kept in log space
// so optimizers can treat every coordinate as unconstrained.
class DiagGaussian {
 public:
  DiagGaussian(Eigen::VectorXd mean, Eigen::VectorXd log_std);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  Eigen::VectorXd stddev() const { return log_std_.array().exp(); }
  Eigen::VectorXd variance() const { return (2.0 * log_std_.array()).exp(); }

  double log_pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(std::mt19937_64& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd log_std_;
};

// Renyi divergence D_alpha(p || q) in nats, alpha >= 0. alpha = 1 is the KL
// limit. Undefined (empty optional) when alpha * Sigma_q + (1-alpha) * Sigma_p
// is not positive definite; past that point the alpha-moment of the weight
// diverges. Throws std::invalid_argument for alpha < 0 or dimension mismatch.
std::optional<double> renyi_divergence(double alpha, const DiagGaussian& p,
                                       const DiagGaussian& q);

// d_alpha = exp(D_alpha). Note E_q[(p/q)^alpha] = exp((alpha-1) D_alpha), so
// for alpha = 2 this is exactly the second moment of the importance weight,
// and Var_q[w] = d_2 - 1.
std::optional<double> exp_renyi_divergence(double alpha, const DiagGaussian& p,
                                           const DiagGaussian& q);

enum class WeightRegime {
  Bounded,        // sigma_q > sigma_p: w in (0, a], density diverges at a
  Unbounded,      // sigma_q < sigma_p: w in [a, inf), polynomial upper tail
  EqualVariance,  // sigma_q = sigma_p: w lognormal, support (0, inf)
};

enum class WeightTailRegime {
  FatTail,     // some weight moment diverges (sigma_p > sigma_q)
  AllMoments,  // every moment finite (sigma_p <= sigma_q)
};

// Analytic law of w(x) = p(x)/q(x) under x ~ q, univariate. The three
// regimes split at exact equality of the standard deviations.
struct WeightLawParams {
  WeightRegime regime;
  double a = 0.0;             // support boundary: sup w (Bounded), min w (Unbounded)
  double mu_bar = 0.0;        // location/scale of the unequal-variance law
  double sigma_bar_sq = 0.0;
  double mu_tilde = 0.0;      // parameters of the equal-variance (lognormal) law
  double sigma_tilde = 0.0;

  // Throws std::invalid_argument on non-positive sigmas, std::domain_error
  // when p == q (the weight is the constant 1 and has no density).
  static WeightLawParams from_univariate(double mu_p, double sigma_p,
                                         double mu_q, double sigma_q);

  // Density of w at y; 0 outside the analytic support. The density is
  // integrable but unbounded at the boundary a.
  double pdf(double y) const;

  // P(w <= y), exact in every regime.
  double cdf(double y) const;
};

WeightTailRegime weight_tail_regime(const WeightLawParams& law);

// Smallest moment order that diverges: sigma_p^2 / (sigma_p^2 - sigma_q^2) in
// the fat-tail regime, +inf when all moments exist.
double critical_moment_order(const WeightLawParams& law);

}  // namespace pois
