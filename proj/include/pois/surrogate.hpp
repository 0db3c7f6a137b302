#pragma once

// Penalized importance-sampling surrogates. Both flavors maximize
//
//   weighted return estimate  -  lambda * sqrt(d_2 / N)
//
// over the target parameters, where d_2 is the 2-Renyi exponential between
// target and behavioral distributions: estimated per visited state for the
// action-based flavor, exact in closed form for the parameter-based one. The
// practical variant replaces sqrt(d_2 / N) with 1 / sqrt(empirical ESS).

#include "pois/batch.hpp"
#include "pois/policy.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace pois {

enum class WeightEstimator { IS, SN };
enum class PenaltyKind { Exact, Ess };

// One surrogate evaluation. value is -inf when the exact divergence is
// undefined at the target (the step is then arbitrarily bad and the line
// search backtracks); d2_hat is +inf in that case.
struct SurrogateEval {
  double value = 0.0;    // is_term - penalty
  double is_term = 0.0;  // IS or self-normalized return estimate
  double penalty = 0.0;
  double d2_hat = 0.0;   // trajectory-level d_2 (estimated or exact)
  double ess_hat = 0.0;  // empirical effective sample size
};

struct SurrogateConfig {
  double lambda = 0.0;
  double gamma = 1.0;
  WeightEstimator estimator = WeightEstimator::IS;
  PenaltyKind penalty = PenaltyKind::Exact;
};

// Sample-based trajectory d_2: mean over episodes of the product over visited
// states of the per-state action d_2(target(.|s) || behavioral(.|s)), with the
// products accumulated in log space. Always >= 1 when defined; nullopt when
// any per-state divergence is undefined (target sigma too wide).
std::optional<double> estimate_traj_renyi(const Batch& batch,
                                          const LinearGaussianPolicy& target);

// State-independent bound sup_s d_2(.|s)^horizon. Finite only when the gain
// matrices coincide (otherwise the sup over states is infinite); +inf also
// when the per-state divergence is undefined.
double sup_renyi_bound(const LinearGaussianPolicy& target,
                       const LinearGaussianPolicy& behavioral, int horizon);

// Action-based surrogate over a fixed batch; evaluate/gradient at candidate
// target policies. Gradients are exact (tested against central differences).
class ApoisObjective {
 public:
  ApoisObjective(const Batch& batch, const SurrogateConfig& cfg);

  SurrogateEval evaluate(const LinearGaussianPolicy& target) const;
  // Pre: evaluate(target).value is finite; throws std::domain_error otherwise.
  Eigen::VectorXd gradient(const LinearGaussianPolicy& target) const;

  const SurrogateConfig& config() const { return cfg_; }
  const std::vector<double>& returns() const { return returns_; }

 private:
  const Batch* batch_;
  SurrogateConfig cfg_;
  std::vector<double> returns_;
};

// Parameter-based counterpart: weights and scores live on the sampled policy
// parameters, the exact penalty uses the closed-form hyperpolicy d_2.
class PpoisObjective {
 public:
  PpoisObjective(const Batch& batch, const SurrogateConfig& cfg);

  SurrogateEval evaluate(const GaussianHyperpolicy& target) const;
  Eigen::VectorXd gradient(const GaussianHyperpolicy& target) const;

  const SurrogateConfig& config() const { return cfg_; }
  const std::vector<double>& returns() const { return returns_; }

 private:
  const Batch* batch_;
  SurrogateConfig cfg_;
  std::vector<double> returns_;
};

}  // namespace pois
