#pragma once

#include "pois/policy.hpp"
#include "pois/trajectory.hpp"

#include <variant>
#include <vector>

namespace pois {

// A batch of rollouts together with whatever generated it: a stochastic
// policy (action-based mode) or a hyperpolicy plus the per-episode sampled
// policy parameters (parameter-based mode).
struct Batch {
  std::vector<Trajectory> trajectories;
  std::vector<Eigen::VectorXd> thetas;  // parameter-based mode only, one per episode
  std::variant<LinearGaussianPolicy, GaussianHyperpolicy> behavioral;

  bool parameter_based() const {
    return std::holds_alternative<GaussianHyperpolicy>(behavioral);
  }
  int size() const { return static_cast<int>(trajectories.size()); }

  // Throw std::logic_error when asked for the wrong mode's behavioral object.
  const LinearGaussianPolicy& behavioral_policy() const;
  const GaussianHyperpolicy& behavioral_hyper() const;
};

}  // namespace pois
