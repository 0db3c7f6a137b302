#include "pois/surrogate.hpp"

#include "pois/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pois {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-dimension pieces of the order-2 divergence between action (or
// parameter) Gaussians with variances vp (target) and vq (behavioral):
//   D_2 = sum_k dmu_k^2 / mix_k + log_term,  mix = 2 vq - vp.
struct Renyi2Parts {
  bool defined = false;
  Eigen::ArrayXd inv_mix;
  double log_term = 0.0;
};

Renyi2Parts renyi2_parts(const Eigen::ArrayXd& vp, const Eigen::ArrayXd& vq) {
  Renyi2Parts parts;
  const Eigen::ArrayXd mix = 2.0 * vq - vp;
  if ((mix <= 0.0).any()) return parts;
  parts.defined = true;
  parts.inv_mix = mix.inverse();
  parts.log_term = -0.5 * (mix.log() + vp.log() - 2.0 * vq.log()).sum();
  return parts;
}

// Combine the pieces of an evaluation, treating non-finite terms as an
// arbitrarily bad step so the line search backtracks instead of chasing
// overflowed estimates.
double combine_value(double is_term, double penalty) {
  if (!std::isfinite(penalty) || !std::isfinite(is_term)) return -kInf;
  return is_term - penalty;
}

double ess_from_log_weights(const std::vector<double>& log_w) {
  const double m = *std::max_element(log_w.begin(), log_w.end());
  double sum = 0.0, sum_sq = 0.0;
  for (double lw : log_w) {
    const double w = std::exp(lw - m);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

// Log importance weight of one trajectory without per-step allocations;
// mu_p / mu_q are caller-owned workspaces of action dimension.
double fast_log_weight(const Trajectory& traj,
                       const LinearGaussianPolicy& target,
                       const LinearGaussianPolicy& beh,
                       const Eigen::ArrayXd& inv_vp,
                       const Eigen::ArrayXd& inv_vq, double dlogstd_sum,
                       Eigen::VectorXd& mu_p, Eigen::VectorXd& mu_q) {
  double lw = traj.length() * dlogstd_sum;
  for (int t = 0; t < traj.length(); ++t) {
    mu_p.noalias() = target.gain() * traj.states[t];
    mu_q.noalias() = beh.gain() * traj.states[t];
    const auto& act = traj.actions[t];
    lw += 0.5 * ((act - mu_q).array().square() * inv_vq -
                 (act - mu_p).array().square() * inv_vp)
                    .sum();
  }
  return lw;
}

std::vector<double> normalized_weights(const std::vector<double>& log_w) {
  const double m = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(log_w.size());
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_w[i] - m);
    sum += w[i];
  }
  for (auto& wi : w) wi /= sum;
  return w;
}

}  // namespace

// ------------------------------------------------------------ estimators --

std::optional<double> estimate_traj_renyi(const Batch& batch,
                                          const LinearGaussianPolicy& target) {
  const LinearGaussianPolicy& beh = batch.behavioral_policy();
  const Eigen::ArrayXd vp = target.log_std().array().exp().square();
  const Eigen::ArrayXd vq = beh.log_std().array().exp().square();
  const Renyi2Parts parts = renyi2_parts(vp, vq);
  if (!parts.defined) return std::nullopt;

  const Eigen::MatrixXd dgain = target.gain() - beh.gain();
  double acc = 0.0;
  Eigen::VectorXd dmu(target.action_dim());
  for (const Trajectory& traj : batch.trajectories) {
    double log_prod = traj.length() * parts.log_term;
    for (int t = 0; t < traj.length(); ++t) {
      dmu.noalias() = dgain * traj.states[t];
      log_prod += (dmu.array().square() * parts.inv_mix).sum();
    }
    acc += std::exp(log_prod);
  }
  return acc / static_cast<double>(batch.size());
}

double sup_renyi_bound(const LinearGaussianPolicy& target,
                       const LinearGaussianPolicy& behavioral, int horizon) {
  if ((target.gain() - behavioral.gain()).cwiseAbs().maxCoeff() > 0.0)
    return kInf;  // mean gap is unbounded over the state space
  const Eigen::ArrayXd vp = target.log_std().array().exp().square();
  const Eigen::ArrayXd vq = behavioral.log_std().array().exp().square();
  const Renyi2Parts parts = renyi2_parts(vp, vq);
  if (!parts.defined) return kInf;
  return std::exp(horizon * parts.log_term);
}

// ------------------------------------------------------ action-based -----

ApoisObjective::ApoisObjective(const Batch& batch, const SurrogateConfig& cfg)
    : batch_(&batch), cfg_(cfg) {
  if (batch.parameter_based())
    throw std::invalid_argument("ApoisObjective: needs an action-based batch");
  if (batch.size() == 0)
    throw std::invalid_argument("ApoisObjective: empty batch");
  returns_.reserve(batch.size());
  for (const Trajectory& traj : batch.trajectories)
    returns_.push_back(trajectory_return(traj, cfg.gamma));
}

SurrogateEval ApoisObjective::evaluate(const LinearGaussianPolicy& target) const {
  const LinearGaussianPolicy& beh = batch_->behavioral_policy();
  const int n = batch_->size();
  const int a = target.action_dim();

  // One fused, allocation-free pass per trajectory: the log weight and the
  // log of the per-state d_2 product share the mean difference dgain * s.
  const Eigen::ArrayXd inv_vp = (-2.0 * target.log_std().array()).exp();
  const Eigen::ArrayXd inv_vq = (-2.0 * beh.log_std().array()).exp();
  const double dlogstd_sum = beh.log_std().sum() - target.log_std().sum();
  const Renyi2Parts parts =
      renyi2_parts(inv_vp.inverse(), inv_vq.inverse());

  std::vector<double> log_w(n), log_prod(n);
  Eigen::VectorXd mu_p(a), mu_q(a);
  if (parts.defined) {
    for (int i = 0; i < n; ++i) {
      const Trajectory& traj = batch_->trajectories[i];
      double lw = traj.length() * dlogstd_sum;
      double lp = traj.length() * parts.log_term;
      for (int t = 0; t < traj.length(); ++t) {
        mu_p.noalias() = target.gain() * traj.states[t];
        mu_q.noalias() = beh.gain() * traj.states[t];
        const auto& act = traj.actions[t];
        lw += 0.5 * ((act - mu_q).array().square() * inv_vq -
                     (act - mu_p).array().square() * inv_vp)
                        .sum();
        lp += ((mu_p - mu_q).array().square() * parts.inv_mix).sum();
      }
      log_w[i] = lw;
      log_prod[i] = lp;
    }
  } else {
    for (int i = 0; i < n; ++i)
      log_w[i] = fast_log_weight(batch_->trajectories[i], target, beh, inv_vp,
                                 inv_vq, dlogstd_sum, mu_p, mu_q);
  }

  SurrogateEval out;
  out.ess_hat = ess_from_log_weights(log_w);

  if (cfg_.estimator == WeightEstimator::IS) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::exp(log_w[i]) * returns_[i];
    out.is_term = acc / n;
  } else {
    const auto w = normalized_weights(log_w);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * returns_[i];
    out.is_term = acc;
  }

  if (parts.defined) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::exp(log_prod[i]);
    out.d2_hat = acc / n;
  } else {
    out.d2_hat = kInf;
  }
  if (cfg_.penalty == PenaltyKind::Exact) {
    // lambda == 0 removes the penalty term altogether (no feasibility gate).
    out.penalty = cfg_.lambda == 0.0 ? 0.0 : cfg_.lambda * std::sqrt(out.d2_hat / n);
  } else {
    out.penalty = cfg_.lambda / std::sqrt(out.ess_hat);
  }
  out.value = combine_value(out.is_term, out.penalty);
  return out;
}

Eigen::VectorXd ApoisObjective::gradient(const LinearGaussianPolicy& target) const {
  const LinearGaussianPolicy& beh = batch_->behavioral_policy();
  const int n = batch_->size();
  const int a = target.action_dim(), s = target.state_dim();
  const int p = target.param_count();

  const Eigen::ArrayXd inv_vp = (-2.0 * target.log_std().array()).exp();
  const Eigen::ArrayXd inv_vq = (-2.0 * beh.log_std().array()).exp();
  const double dlogstd_sum = beh.log_std().sum() - target.log_std().sum();

  std::vector<double> log_w(n);
  std::vector<Eigen::VectorXd> score(n);
  {
    Eigen::VectorXd mu_p(a), mu_q(a);
    for (int i = 0; i < n; ++i) {
      log_w[i] = fast_log_weight(batch_->trajectories[i], target, beh, inv_vp,
                                 inv_vq, dlogstd_sum, mu_p, mu_q);
      score[i] = traj_score(batch_->trajectories[i], target);
    }
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);

  if (cfg_.estimator == WeightEstimator::IS) {
    for (int i = 0; i < n; ++i)
      grad.noalias() += (std::exp(log_w[i]) * returns_[i] / n) * score[i];
  } else {
    const auto w = normalized_weights(log_w);
    double mu = 0.0;
    for (int i = 0; i < n; ++i) mu += w[i] * returns_[i];
    for (int i = 0; i < n; ++i)
      grad.noalias() += w[i] * (returns_[i] - mu) * score[i];
  }
  if (!grad.allFinite())
    throw std::domain_error("ApoisObjective::gradient: overflowed weights");

  if (cfg_.lambda == 0.0) return grad;

  if (cfg_.penalty == PenaltyKind::Exact) {
    const Eigen::ArrayXd vp = target.log_std().array().exp().square();
    const Eigen::ArrayXd vq = beh.log_std().array().exp().square();
    const Renyi2Parts parts = renyi2_parts(vp, vq);
    if (!parts.defined)
      throw std::domain_error("ApoisObjective::gradient: undefined divergence");
    const Eigen::MatrixXd dgain = target.gain() - beh.gain();
    // Per-step, state-independent part of dD2/dOmega_k: vp/mix - 1.
    const Eigen::ArrayXd omega_flat = vp * parts.inv_mix - 1.0;

    double d2_hat = 0.0;
    Eigen::VectorXd grad_d2 = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd g_i(p), dmu(a);
    Eigen::ArrayXd scaled(a);
    for (int i = 0; i < n; ++i) {
      const Trajectory& traj = batch_->trajectories[i];
      double log_prod = traj.length() * parts.log_term;
      g_i.setZero();
      for (int t = 0; t < traj.length(); ++t) {
        dmu.noalias() = dgain * traj.states[t];
        scaled = dmu.array() * parts.inv_mix;
        log_prod += (dmu.array() * scaled).sum();
        for (int k = 0; k < a; ++k)
          g_i.segment(k * s, s) += 2.0 * scaled[k] * traj.states[t];
        g_i.tail(a).array() += 2.0 * vp * scaled.square();
      }
      g_i.tail(a).array() += traj.length() * omega_flat;
      const double e = std::exp(log_prod);
      d2_hat += e / n;
      grad_d2.noalias() += (e / n) * g_i;
    }
    if (!std::isfinite(d2_hat))
      throw std::domain_error("ApoisObjective::gradient: d2 overflow");
    grad.noalias() -=
        (cfg_.lambda / (2.0 * std::sqrt(d2_hat * n))) * grad_d2;
  } else {
    const auto w = normalized_weights(log_w);
    Eigen::VectorXd mean_score = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) mean_score.noalias() += w[i] * score[i];
    double ssq = 0.0;
    Eigen::VectorXd gs = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      ssq += w[i] * w[i];
      gs.noalias() += w[i] * w[i] * (score[i] - mean_score);
    }
    grad.noalias() -= (cfg_.lambda / std::sqrt(ssq)) * gs;
  }
  return grad;
}

// --------------------------------------------------- parameter-based -----

PpoisObjective::PpoisObjective(const Batch& batch, const SurrogateConfig& cfg)
    : batch_(&batch), cfg_(cfg) {
  if (!batch.parameter_based())
    throw std::invalid_argument("PpoisObjective: needs a parameter-based batch");
  if (batch.size() == 0)
    throw std::invalid_argument("PpoisObjective: empty batch");
  if (batch.thetas.size() != batch.trajectories.size())
    throw std::invalid_argument("PpoisObjective: thetas/trajectories mismatch");
  returns_.reserve(batch.size());
  for (const Trajectory& traj : batch.trajectories)
    returns_.push_back(trajectory_return(traj, cfg.gamma));
}

SurrogateEval PpoisObjective::evaluate(const GaussianHyperpolicy& target) const {
  const GaussianHyperpolicy& beh = batch_->behavioral_hyper();
  const int n = batch_->size();

  std::vector<double> log_w(n);
  for (int i = 0; i < n; ++i)
    log_w[i] = hyper_log_weight(batch_->thetas[i], target, beh);

  SurrogateEval out;
  out.ess_hat = ess_from_log_weights(log_w);

  if (cfg_.estimator == WeightEstimator::IS) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::exp(log_w[i]) * returns_[i];
    out.is_term = acc / n;
  } else {
    const auto w = normalized_weights(log_w);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * returns_[i];
    out.is_term = acc;
  }

  const auto d2 =
      exp_renyi_divergence(2.0, target.distribution(), beh.distribution());
  out.d2_hat = d2 ? *d2 : kInf;
  if (cfg_.penalty == PenaltyKind::Exact) {
    out.penalty = cfg_.lambda == 0.0 ? 0.0 : cfg_.lambda * std::sqrt(out.d2_hat / n);
  } else {
    out.penalty = cfg_.lambda / std::sqrt(out.ess_hat);
  }
  out.value = combine_value(out.is_term, out.penalty);
  return out;
}

Eigen::VectorXd PpoisObjective::gradient(const GaussianHyperpolicy& target) const {
  const GaussianHyperpolicy& beh = batch_->behavioral_hyper();
  const int n = batch_->size();
  const int d = target.theta_dim();
  const int p = target.param_count();

  std::vector<double> log_w(n);
  std::vector<Eigen::VectorXd> score(n);
  for (int i = 0; i < n; ++i) {
    log_w[i] = hyper_log_weight(batch_->thetas[i], target, beh);
    score[i] = hyper_score(batch_->thetas[i], target);
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
  if (cfg_.estimator == WeightEstimator::IS) {
    for (int i = 0; i < n; ++i)
      grad.noalias() += (std::exp(log_w[i]) * returns_[i] / n) * score[i];
  } else {
    const auto w = normalized_weights(log_w);
    double mu = 0.0;
    for (int i = 0; i < n; ++i) mu += w[i] * returns_[i];
    for (int i = 0; i < n; ++i)
      grad.noalias() += w[i] * (returns_[i] - mu) * score[i];
  }
  if (!grad.allFinite())
    throw std::domain_error("PpoisObjective::gradient: overflowed weights");

  if (cfg_.lambda == 0.0) return grad;

  if (cfg_.penalty == PenaltyKind::Exact) {
    const Eigen::ArrayXd vp = target.sigma_log().array().exp().square();
    const Eigen::ArrayXd vq = beh.sigma_log().array().exp().square();
    const Renyi2Parts parts = renyi2_parts(vp, vq);
    if (!parts.defined)
      throw std::domain_error("PpoisObjective::gradient: undefined divergence");
    const Eigen::ArrayXd dmu = (target.mu() - beh.mu()).array();
    const double d2 =
        std::exp((dmu.square() * parts.inv_mix).sum() + parts.log_term);

    Eigen::VectorXd grad_div(p);  // dD2/drho at the target
    grad_div.head(d) = (2.0 * dmu * parts.inv_mix).matrix();
    grad_div.tail(d) =
        (2.0 * vp *
         (dmu.square() * parts.inv_mix.square() +
          0.5 * (parts.inv_mix - vp.inverse())))
            .matrix();
    // dP/drho = lambda sqrt(d2/N) * dD2/drho / 2.
    grad.noalias() -=
        (0.5 * cfg_.lambda * std::sqrt(d2 / n)) * grad_div;
  } else {
    const auto w = normalized_weights(log_w);
    Eigen::VectorXd mean_score = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) mean_score.noalias() += w[i] * score[i];
    double ssq = 0.0;
    Eigen::VectorXd gs = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      ssq += w[i] * w[i];
      gs.noalias() += w[i] * w[i] * (score[i] - mean_score);
    }
    grad.noalias() -= (cfg_.lambda / std::sqrt(ssq)) * gs;
  }
  return grad;
}

}  // namespace pois
