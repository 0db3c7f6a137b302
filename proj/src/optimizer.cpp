#include "pois/optimizer.hpp"

#include "pois/estimators.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace pois {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRidge = 1e-6;

double penalty_multiplier(double delta, double f_inf) {
  if (delta == 1.0) return 0.0;
  return f_inf * std::sqrt((1.0 - delta) / delta);
}

// Importance-weighted returns of a batch against a candidate target; used
// for the record diagnostics.
template <class TargetT, class LogWeightFn>
std::vector<WeightedSample> weighted_returns(const Batch& batch,
                                             const TargetT& target,
                                             double gamma,
                                             LogWeightFn&& log_weight) {
  std::vector<WeightedSample> samples;
  samples.reserve(batch.size());
  for (int i = 0; i < batch.size(); ++i)
    samples.push_back({log_weight(i, target),
                       trajectory_return(batch.trajectories[i], gamma)});
  return samples;
}

double max_abs_return(const std::vector<double>& returns) {
  double m = 0.0;
  for (double r : returns) m = std::max(m, std::abs(r));
  return m;
}

double mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

// G^{-1} g for a dense estimated metric, with a ridge for conditioning and
// an identity fallback when the factorization fails anyway.
Eigen::VectorXd solve_metric(Eigen::MatrixXd metric, const Eigen::VectorXd& g,
                             bool* fallback) {
  metric.diagonal().array() += kRidge;
  Eigen::LLT<Eigen::MatrixXd> llt(metric);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd dir = llt.solve(g);
    if (dir.allFinite()) return dir;
  }
  if (fallback) *fallback = true;
  std::cerr << "pois: estimated metric not positive definite, "
               "falling back to identity for this step\n";
  return g;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw std::invalid_argument("OptimizerConfig: delta must be in (0, 1]");
  if (n_episodes < 1)
    throw std::invalid_argument("OptimizerConfig: n_episodes must be >= 1");
  if (horizon < 1)
    throw std::invalid_argument("OptimizerConfig: horizon must be >= 1");
  if (!(gamma > 0.0) || !(gamma <= 1.0))
    throw std::invalid_argument("OptimizerConfig: gamma must be in (0, 1]");
  if (online_iterations < 1)
    throw std::invalid_argument(
        "OptimizerConfig: online_iterations must be >= 1");
  if (max_offline_iterations < 1)
    throw std::invalid_argument(
        "OptimizerConfig: max_offline_iterations must be >= 1");
  if (!(line_search.eta > 1.0))
    throw std::invalid_argument("OptimizerConfig: eta must be > 1");
  if (line_search.max_attempts < 1)
    throw std::invalid_argument("OptimizerConfig: max_attempts must be >= 1");
}

OfflineResult offline_optimize(const OfflineProblem& problem,
                               Eigen::VectorXd start,
                               const OptimizerConfig& cfg) {
  OfflineResult res;
  res.params = std::move(start);
  const SurrogateEval first = problem.evaluate(res.params);
  if (!std::isfinite(first.value))
    throw std::domain_error("offline_optimize: start point not feasible");
  res.trace.push_back(first.value);

  for (int k = 0; k < cfg.max_offline_iterations; ++k) {
    const Eigen::VectorXd g = problem.gradient(res.params);
    bool fallback = false;
    Eigen::VectorXd dir =
        problem.natural_direction ? problem.natural_direction(res.params, g, &fallback)
                                  : g;
    res.metric_fallback |= fallback;
    const double gnorm_sq = g.dot(dir);
    if (!(gnorm_sq > 0.0) || !std::isfinite(gnorm_sq)) break;

    const auto ls = parabolic_line_search(
        [&](double alpha) {
          return problem.evaluate(res.params + alpha * dir).value;
        },
        gnorm_sq, cfg.line_search);
    if (ls.alpha_star == 0.0) break;

    res.params += ls.alpha_star * dir;
    res.trace.push_back(res.trace.back() + ls.delta_l);
    res.iterations += 1;
    res.last_step = ls.alpha_star;
  }
  return res;
}

LinearGaussianPolicy initial_policy(const EnvSpec& spec,
                                    std::mt19937_64& rng) {
  std::normal_distribution<double> unit;
  Eigen::MatrixXd gain(spec.action_dim, spec.state_dim);
  for (int r = 0; r < gain.rows(); ++r)
    for (int c = 0; c < gain.cols(); ++c) gain(r, c) = 0.01 * unit(rng);
  return LinearGaussianPolicy(gain,
                              Eigen::VectorXd::Zero(spec.action_dim));
}

GaussianHyperpolicy initial_hyperpolicy(const EnvSpec& spec,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> unit;
  const int p = spec.action_dim * spec.state_dim;
  Eigen::VectorXd mu(p);
  for (int k = 0; k < p; ++k) mu[k] = 0.01 * unit(rng);
  return GaussianHyperpolicy(mu, Eigen::VectorXd::Zero(p));
}

std::vector<IterationRecord> run_apois(const Environment& env,
                                       const LinearGaussianPolicy& init,
                                       const OptimizerConfig& cfg) {
  cfg.validate();
  const int adim = env.spec().action_dim, sdim = env.spec().state_dim;
  if (init.action_dim() != adim || init.state_dim() != sdim)
    throw std::invalid_argument("run_apois: policy/env dimension mismatch");

  std::mt19937_64 rng(cfg.seed);
  LinearGaussianPolicy policy = init;
  std::vector<IterationRecord> records;
  records.reserve(cfg.online_iterations);

  for (int j = 0; j < cfg.online_iterations; ++j) {
    const Batch batch = collect_trajectories(env, policy, cfg.n_episodes,
                                             cfg.horizon, rng);

    SurrogateConfig scfg;
    scfg.gamma = cfg.gamma;
    scfg.estimator = cfg.estimator;
    scfg.penalty = cfg.penalty;
    // The penalty multiplier uses the batch's own empirical return range.
    std::vector<double> returns;
    returns.reserve(batch.size());
    for (const auto& t : batch.trajectories)
      returns.push_back(trajectory_return(t, cfg.gamma));
    scfg.lambda = penalty_multiplier(cfg.delta, max_abs_return(returns));
    const ApoisObjective penalized(batch, scfg);

    OfflineProblem problem;
    problem.evaluate = [&](const Eigen::VectorXd& v) {
      return penalized.evaluate(
          LinearGaussianPolicy::from_params(adim, sdim, v));
    };
    problem.gradient = [&](const Eigen::VectorXd& v) {
      return penalized.gradient(
          LinearGaussianPolicy::from_params(adim, sdim, v));
    };
    if (cfg.natural_gradient) {
      problem.natural_direction = [&](const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& g, bool* fb) {
        const auto target = LinearGaussianPolicy::from_params(adim, sdim, v);
        return solve_metric(
            estimated_fim(batch.trajectories, target, policy,
                          cfg.estimator == WeightEstimator::SN),
            g, fb);
      };
    }

    const SurrogateEval before = penalized.evaluate(policy);
    const OfflineResult res =
        offline_optimize(problem, policy.params(), cfg);
    const LinearGaussianPolicy next =
        LinearGaussianPolicy::from_params(adim, sdim, res.params);
    const SurrogateEval after = penalized.evaluate(next);

    const auto samples = weighted_returns(
        batch, next, cfg.gamma, [&](int i, const LinearGaussianPolicy& t) {
          return traj_log_weight(batch.trajectories[i], t, policy);
        });

    IterationRecord rec;
    rec.iteration = j + 1;
    rec.episodes_cum = static_cast<long>(j + 1) * cfg.n_episodes;
    rec.avg_return = mean(returns);
    rec.ess_hat = after.ess_hat;
    rec.weight_var = weight_variance(samples);
    rec.d2_hat = after.d2_hat;
    rec.bound_before = before.value;
    rec.bound_after = after.value;
    rec.policy_sigma_mean = next.log_std().array().exp().mean();
    rec.offline_iters = res.iterations;
    rec.step_size_last = res.last_step;
    records.push_back(rec);

    policy = next;
  }
  return records;
}

std::vector<IterationRecord> run_ppois(const Environment& env,
                                       const GaussianHyperpolicy& init,
                                       const OptimizerConfig& cfg) {
  cfg.validate();
  const int adim = env.spec().action_dim, sdim = env.spec().state_dim;
  if (init.theta_dim() != adim * sdim)
    throw std::invalid_argument("run_ppois: hyperpolicy/env dimension mismatch");

  std::mt19937_64 rng(cfg.seed);
  GaussianHyperpolicy hyper = init;
  std::vector<IterationRecord> records;
  records.reserve(cfg.online_iterations);

  for (int j = 0; j < cfg.online_iterations; ++j) {
    const Batch batch = collect_parameter_batch(env, hyper, cfg.n_episodes,
                                                cfg.horizon, rng);

    SurrogateConfig scfg;
    scfg.gamma = cfg.gamma;
    scfg.estimator = cfg.estimator;
    scfg.penalty = cfg.penalty;
    std::vector<double> returns;
    returns.reserve(batch.size());
    for (const auto& t : batch.trajectories)
      returns.push_back(trajectory_return(t, cfg.gamma));
    scfg.lambda = penalty_multiplier(cfg.delta, max_abs_return(returns));
    const PpoisObjective penalized(batch, scfg);

    OfflineProblem problem;
    problem.evaluate = [&](const Eigen::VectorXd& v) {
      return penalized.evaluate(GaussianHyperpolicy::from_params(v));
    };
    problem.gradient = [&](const Eigen::VectorXd& v) {
      return penalized.gradient(GaussianHyperpolicy::from_params(v));
    };
    if (cfg.natural_gradient) {
      problem.natural_direction = [&](const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& g, bool*) {
        const auto target = GaussianHyperpolicy::from_params(v);
        Eigen::VectorXd diag = exact_hyper_fim(target);
        diag.array() += kRidge;
        return (g.array() / diag.array()).matrix().eval();
      };
    }

    const SurrogateEval before = penalized.evaluate(hyper);
    const OfflineResult res = offline_optimize(problem, hyper.params(), cfg);
    const GaussianHyperpolicy next = GaussianHyperpolicy::from_params(res.params);
    const SurrogateEval after = penalized.evaluate(next);

    const auto samples = weighted_returns(
        batch, next, cfg.gamma, [&](int i, const GaussianHyperpolicy& t) {
          return hyper_log_weight(batch.thetas[i], t, hyper);
        });

    IterationRecord rec;
    rec.iteration = j + 1;
    rec.episodes_cum = static_cast<long>(j + 1) * cfg.n_episodes;
    rec.avg_return = mean(returns);
    rec.ess_hat = after.ess_hat;
    rec.weight_var = weight_variance(samples);
    rec.d2_hat = after.d2_hat;
    rec.bound_before = before.value;
    rec.bound_after = after.value;
    rec.policy_sigma_mean = next.sigma_log().array().exp().mean();
    rec.offline_iters = res.iterations;
    rec.step_size_last = res.last_step;
    records.push_back(rec);

    hyper = next;
  }
  return records;
}

}  // namespace pois
