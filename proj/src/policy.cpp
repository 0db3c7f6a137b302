#include "pois/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pois {

double trajectory_return(const Trajectory& traj, double gamma) {
  double acc = 0.0, disc = 1.0;
  for (double r : traj.rewards) {
    acc += disc * r;
    disc *= gamma;
  }
  return acc;
}

LinearGaussianPolicy::LinearGaussianPolicy(Eigen::MatrixXd gain,
                                           Eigen::VectorXd log_std)
    : gain_(std::move(gain)), log_std_(std::move(log_std)) {
  if (gain_.rows() == 0 || gain_.cols() == 0)
    throw std::invalid_argument("LinearGaussianPolicy: empty gain matrix");
  if (log_std_.size() != gain_.rows())
    throw std::invalid_argument(
        "LinearGaussianPolicy: log_std size must match action dim");
}

LinearGaussianPolicy LinearGaussianPolicy::from_params(
    int action_dim, int state_dim, const Eigen::VectorXd& params) {
  if (params.size() != action_dim * (state_dim + 1))
    throw std::invalid_argument("LinearGaussianPolicy: bad parameter count");
  Eigen::MatrixXd gain(action_dim, state_dim);
  for (int k = 0; k < action_dim; ++k)
    gain.row(k) = params.segment(k * state_dim, state_dim).transpose();
  return LinearGaussianPolicy(std::move(gain),
                              params.tail(action_dim));
}

Eigen::VectorXd LinearGaussianPolicy::params() const {
  Eigen::VectorXd v(param_count());
  const int s = state_dim();
  for (int k = 0; k < action_dim(); ++k)
    v.segment(k * s, s) = gain_.row(k).transpose();
  v.tail(action_dim()) = log_std_;
  return v;
}

DiagGaussian LinearGaussianPolicy::action_dist(
    const Eigen::VectorXd& state) const {
  return DiagGaussian(gain_ * state, log_std_);
}

Eigen::VectorXd LinearGaussianPolicy::act(const Eigen::VectorXd& state,
                                          std::mt19937_64& rng) const {
  return action_dist(state).sample(rng);
}

double LinearGaussianPolicy::log_pdf(const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& action) const {
  return action_dist(state).log_pdf(action);
}

DeterministicLinearPolicy::DeterministicLinearPolicy(
    int action_dim, int state_dim, const Eigen::VectorXd& theta)
    : gain_(action_dim, state_dim) {
  if (theta.size() != action_dim * state_dim)
    throw std::invalid_argument("DeterministicLinearPolicy: bad theta size");
  for (int k = 0; k < action_dim; ++k)
    gain_.row(k) = theta.segment(k * state_dim, state_dim).transpose();
}

GaussianHyperpolicy::GaussianHyperpolicy(Eigen::VectorXd mu,
                                         Eigen::VectorXd sigma_log)
    : mu_(std::move(mu)), sigma_log_(std::move(sigma_log)) {
  if (mu_.size() != sigma_log_.size() || mu_.size() == 0)
    throw std::invalid_argument("GaussianHyperpolicy: bad parameter sizes");
}

GaussianHyperpolicy GaussianHyperpolicy::from_params(
    const Eigen::VectorXd& rho) {
  if (rho.size() == 0 || rho.size() % 2 != 0)
    throw std::invalid_argument("GaussianHyperpolicy: rho size must be even");
  const int p = static_cast<int>(rho.size()) / 2;
  return GaussianHyperpolicy(rho.head(p), rho.tail(p));
}

Eigen::VectorXd GaussianHyperpolicy::params() const {
  Eigen::VectorXd v(param_count());
  v.head(theta_dim()) = mu_;
  v.tail(theta_dim()) = sigma_log_;
  return v;
}

Eigen::VectorXd GaussianHyperpolicy::sample(std::mt19937_64& rng) const {
  return distribution().sample(rng);
}

double GaussianHyperpolicy::log_pdf(const Eigen::VectorXd& theta) const {
  return distribution().log_pdf(theta);
}

double traj_log_weight(const Trajectory& traj,
                       const LinearGaussianPolicy& target,
                       const LinearGaussianPolicy& behavioral) {
  double acc = 0.0;
  for (int t = 0; t < traj.length(); ++t)
    acc += target.log_pdf(traj.states[t], traj.actions[t]) -
           behavioral.log_pdf(traj.states[t], traj.actions[t]);
  return acc;
}

double hyper_log_weight(const Eigen::VectorXd& theta,
                        const GaussianHyperpolicy& target,
                        const GaussianHyperpolicy& behavioral) {
  return target.log_pdf(theta) - behavioral.log_pdf(theta);
}

Eigen::VectorXd traj_score(const Trajectory& traj,
                           const LinearGaussianPolicy& policy) {
  const int a = policy.action_dim(), s = policy.state_dim();
  const Eigen::ArrayXd inv_var = (-2.0 * policy.log_std().array()).exp();
  Eigen::VectorXd score = Eigen::VectorXd::Zero(policy.param_count());
  Eigen::VectorXd mu(a);
  Eigen::ArrayXd err(a), scaled(a);
  for (int t = 0; t < traj.length(); ++t) {
    const Eigen::VectorXd& st = traj.states[t];
    mu.noalias() = policy.gain() * st;
    err = (traj.actions[t] - mu).array();
    scaled = err * inv_var;  // (a - Ms) / sigma^2
    for (int k = 0; k < a; ++k)
      score.segment(k * s, s) += scaled[k] * st;
    score.tail(a).array() += err * scaled - 1.0;
  }
  return score;
}

Eigen::VectorXd hyper_score(const Eigen::VectorXd& theta,
                            const GaussianHyperpolicy& hyper) {
  const int p = hyper.theta_dim();
  if (theta.size() != p)
    throw std::invalid_argument("hyper_score: theta size mismatch");
  const Eigen::ArrayXd inv_var = (-2.0 * hyper.sigma_log().array()).exp();
  const Eigen::ArrayXd err = (theta - hyper.mu()).array();
  Eigen::VectorXd score(2 * p);
  score.head(p) = (err * inv_var).matrix();
  score.tail(p) = (err.square() * inv_var - 1.0).matrix();
  return score;
}

Eigen::VectorXd exact_hyper_fim(const GaussianHyperpolicy& hyper) {
  const int p = hyper.theta_dim();
  Eigen::VectorXd diag(2 * p);
  diag.head(p) = (-2.0 * hyper.sigma_log().array()).exp().matrix();
  diag.tail(p).setConstant(2.0);
  return diag;
}

Eigen::MatrixXd estimated_fim(const std::vector<Trajectory>& trajs,
                              const LinearGaussianPolicy& target,
                              const LinearGaussianPolicy& behavioral,
                              bool use_sn) {
  if (trajs.empty())
    throw std::invalid_argument("estimated_fim: empty batch");
  const int p = target.param_count();
  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(p, p);

  std::vector<double> log_w(trajs.size());
  for (size_t i = 0; i < trajs.size(); ++i)
    log_w[i] = traj_log_weight(trajs[i], target, behavioral);

  double norm;
  if (use_sn) {
    const double m = *std::max_element(log_w.begin(), log_w.end());
    norm = 0.0;
    for (auto& lw : log_w) {
      lw -= m;
      norm += std::exp(lw);
    }
  } else {
    norm = static_cast<double>(trajs.size());
  }

  for (size_t i = 0; i < trajs.size(); ++i) {
    const Eigen::VectorXd s = traj_score(trajs[i], target);
    fim.noalias() += (std::exp(log_w[i]) / norm) * s * s.transpose();
  }
  return fim;
}

}  // namespace pois
