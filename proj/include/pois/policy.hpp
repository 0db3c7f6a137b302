#pragma once

// Linear Gaussian policies, the Gaussian hyperpolicy over their parameters,
// and the score / Fisher information machinery both optimizers share.
//
// Flattening conventions (used by every gradient in the project):
//   policy        theta = [gain row-major, log_std]      size a*s + a
//   hyperpolicy   rho   = [mu, sigma_log]                 size 2 * theta_dim

#include "pois/gaussian.hpp"
#include "pois/trajectory.hpp"

#include <Eigen/Core>

#include <random>
#include <vector>

namespace pois {

// a ~ N(M s, diag(exp(2 Omega))), no bias term.
class LinearGaussianPolicy {
 public:
  LinearGaussianPolicy(Eigen::MatrixXd gain, Eigen::VectorXd log_std);
  static LinearGaussianPolicy from_params(int action_dim, int state_dim,
                                          const Eigen::VectorXd& params);

  int action_dim() const { return static_cast<int>(gain_.rows()); }
  int state_dim() const { return static_cast<int>(gain_.cols()); }
  int param_count() const { return action_dim() * (state_dim() + 1); }
  const Eigen::MatrixXd& gain() const { return gain_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }

  Eigen::VectorXd params() const;
  DiagGaussian action_dist(const Eigen::VectorXd& state) const;
  Eigen::VectorXd act(const Eigen::VectorXd& state, std::mt19937_64& rng) const;
  double log_pdf(const Eigen::VectorXd& state,
                 const Eigen::VectorXd& action) const;

 private:
  Eigen::MatrixXd gain_;     // action_dim x state_dim
  Eigen::VectorXd log_std_;  // action_dim
};

// a = M s with M unflattened from a sampled theta (row-major). Used when the
// exploration noise lives in parameter space.
class DeterministicLinearPolicy {
 public:
  DeterministicLinearPolicy(int action_dim, int state_dim,
                            const Eigen::VectorXd& theta);
  Eigen::VectorXd act(const Eigen::VectorXd& state) const { return gain_ * state; }
  const Eigen::MatrixXd& gain() const { return gain_; }

 private:
  Eigen::MatrixXd gain_;
};

// Factored Gaussian nu_rho over flattened policy parameters theta.
class GaussianHyperpolicy {
 public:
  GaussianHyperpolicy(Eigen::VectorXd mu, Eigen::VectorXd sigma_log);
  static GaussianHyperpolicy from_params(const Eigen::VectorXd& rho);

  int theta_dim() const { return static_cast<int>(mu_.size()); }
  int param_count() const { return 2 * theta_dim(); }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& sigma_log() const { return sigma_log_; }

  Eigen::VectorXd params() const;
  DiagGaussian distribution() const { return DiagGaussian(mu_, sigma_log_); }
  Eigen::VectorXd sample(std::mt19937_64& rng) const;
  double log_pdf(const Eigen::VectorXd& theta) const;

 private:
  Eigen::VectorXd mu_;
  Eigen::VectorXd sigma_log_;
};

// log prod_t target(a_t | s_t) / behavioral(a_t | s_t). The environment's
// initial-state and transition densities cancel in the ratio, so trajectory
// weights depend on the policies alone.
double traj_log_weight(const Trajectory& traj,
                       const LinearGaussianPolicy& target,
                       const LinearGaussianPolicy& behavioral);

// log nu_target(theta) / nu_behavioral(theta).
double hyper_log_weight(const Eigen::VectorXd& theta,
                        const GaussianHyperpolicy& target,
                        const GaussianHyperpolicy& behavioral);

// Gradient of log p(tau | theta) in the policy parameters: the sum of
// per-step scores of the action distribution.
Eigen::VectorXd traj_score(const Trajectory& traj,
                           const LinearGaussianPolicy& policy);

// Gradient of log nu_rho(theta) in rho = [mu, sigma_log].
Eigen::VectorXd hyper_score(const Eigen::VectorXd& theta,
                            const GaussianHyperpolicy& hyper);

// Exact Fisher information of the hyperpolicy in (mu, sigma_log)
// coordinates. Diagonal: 1/sigma_j^2 for the mean block, 2 for each log-std
// coordinate; returned as a vector.
Eigen::VectorXd exact_hyper_fim(const GaussianHyperpolicy& hyper);

// Sample Fisher matrix at the target from behavioral trajectories,
// (1/N) sum_i w_i score_i score_i^T, with normalized weights when use_sn.
Eigen::MatrixXd estimated_fim(const std::vector<Trajectory>& trajs,
                              const LinearGaussianPolicy& target,
                              const LinearGaussianPolicy& behavioral,
                              bool use_sn);

}  // namespace pois
