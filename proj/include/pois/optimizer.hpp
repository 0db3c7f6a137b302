#pragma once

// Online/offline optimization loops. Each online iteration collects a fresh
// batch with the current (hyper)policy, then an offline phase repeatedly
// builds the penalized surrogate on that fixed batch, takes a (natural)
// gradient step sized by the parabolic line search, and stops on a zero step
// or after max_offline_iterations. The last accepted iterate becomes the
// next behavioral (hyper)policy.

#include "pois/envs.hpp"
#include "pois/line_search.hpp"
#include "pois/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace pois {

struct OptimizerConfig {
  double delta = 0.4;  // confidence; delta == 1 turns the penalty off
  int n_episodes = 100;
  int horizon = 500;
  double gamma = 1.0;
  int online_iterations = 500;
  int max_offline_iterations = 10;
  WeightEstimator estimator = WeightEstimator::IS;
  bool natural_gradient = false;
  PenaltyKind penalty = PenaltyKind::Exact;
  LineSearchConfig line_search;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// One row of the learning curve. Diagnostics (ess, weight variance, d2,
// bound_after) compare the adopted target against the batch's behavioral
// (hyper)policy at the end of the offline phase; sigma_mean tracks the
// adopted policy's exploration spread.
struct IterationRecord {
  int iteration = 0;       // 1-based
  long episodes_cum = 0;
  double avg_return = 0.0;
  double ess_hat = 0.0;
  double weight_var = 0.0;
  double d2_hat = 0.0;
  double bound_before = 0.0;
  double bound_after = 0.0;
  double policy_sigma_mean = 0.0;
  int offline_iters = 0;
  double step_size_last = 0.0;
};

// Offline phase over flattened parameters. evaluate must be finite at start.
struct OfflineProblem {
  std::function<SurrogateEval(const Eigen::VectorXd&)> evaluate;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  // Ascent direction G^{-1} g; sets *fallback when a sick estimated metric
  // forced the identity. Null means plain gradient ascent.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                bool*)>
      natural_direction;
};

struct OfflineResult {
  Eigen::VectorXd params;
  std::vector<double> trace;  // surrogate values, start first, non-decreasing
  int iterations = 0;         // accepted steps
  double last_step = 0.0;     // alpha of the last accepted step
  bool metric_fallback = false;
};

OfflineResult offline_optimize(const OfflineProblem& problem,
                               Eigen::VectorXd start,
                               const OptimizerConfig& cfg);

// Appendix-style initializations: gains (or hyper means) drawn from
// N(0, 0.01^2), unit standard deviations.
LinearGaussianPolicy initial_policy(const EnvSpec& spec, std::mt19937_64& rng);
GaussianHyperpolicy initial_hyperpolicy(const EnvSpec& spec,
                                        std::mt19937_64& rng);

std::vector<IterationRecord> run_apois(const Environment& env,
                                       const LinearGaussianPolicy& init,
                                       const OptimizerConfig& cfg);

std::vector<IterationRecord> run_ppois(const Environment& env,
                                       const GaussianHyperpolicy& init,
                                       const OptimizerConfig& cfg);

}  // namespace pois
