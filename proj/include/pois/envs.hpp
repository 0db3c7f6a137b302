#pragma once

// Episodic control tasks with box-bounded actions and bounded rewards, plus
// batch collection helpers. Dynamics are deterministic given (state, action);
// all stochasticity lives in reset() and in the acting policy, so importance
// weights over trajectories reduce to products of policy ratios.

#include "pois/batch.hpp"
#include "pois/policy.hpp"

#include <memory>
#include <random>
#include <string>

namespace pois {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  int horizon = 500;    // default episode cap
  double gamma = 1.0;   // conventional discount for this task
  double r_max = 0.0;   // finite bound on |reward|
  Eigen::VectorXd action_low, action_high;
};

struct StepResult {
  Eigen::VectorXd next_state;
  double reward = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Eigen::VectorXd reset(std::mt19937_64& rng) const = 0;
  // Deterministic; actions are clipped to the declared box inside.
  virtual StepResult step(const Eigen::VectorXd& state,
                          const Eigen::VectorXd& action) const = 0;
};

// x' = clip(x + a, [-4, 4]), a in [-2, 2], r = -(q x^2 + r_a a^2) with
// q = r_a = 0.5 by default, x0 ~ U[-1, 1], horizon 20, gamma 0.99.
class Lqg1d : public Environment {
 public:
  explicit Lqg1d(double state_cost = 0.5, double action_cost = 0.5,
                 int horizon = 20, double gamma = 0.99);
  const EnvSpec& spec() const override { return spec_; }
  Eigen::VectorXd reset(std::mt19937_64& rng) const override;
  StepResult step(const Eigen::VectorXd& state,
                  const Eigen::VectorXd& action) const override;

  double state_cost() const { return state_cost_; }
  double action_cost() const { return action_cost_; }

 private:
  EnvSpec spec_;
  double state_cost_, action_cost_;
};

// Classic cart-pole balancing with a continuous force. State
// (x, x_dot, theta, theta_dot), Euler integration at 0.02 s, force 10 a with
// a in [-1, 1]. Reward 10 - (1 - cos theta) - 1e-5 a^2; falls over at
// |x| > 2.4 or |theta| > 0.2 rad.
class CartPole : public Environment {
 public:
  CartPole();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::VectorXd reset(std::mt19937_64& rng) const override;
  StepResult step(const Eigen::VectorXd& state,
                  const Eigen::VectorXd& action) const override;

 private:
  EnvSpec spec_;
};

// Continuous mountain car: v' = v + 0.0015 a - 0.0025 cos(3x), goal at
// x >= 0.45, -1 per step until the goal.
class MountainCar : public Environment {
 public:
  MountainCar();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::VectorXd reset(std::mt19937_64& rng) const override;
  StepResult step(const Eigen::VectorXd& state,
                  const Eigen::VectorXd& action) const override;

 private:
  EnvSpec spec_;
};

// Pendulum balancing from a near-upright start, torque 2 a, angle-penalty
// reward -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2); fails at |theta| > pi/2.
class Pendulum : public Environment {
 public:
  Pendulum();
  const EnvSpec& spec() const override { return spec_; }
  Eigen::VectorXd reset(std::mt19937_64& rng) const override;
  StepResult step(const Eigen::VectorXd& state,
                  const Eigen::VectorXd& action) const override;

 private:
  EnvSpec spec_;
};

// Names: lqg, cartpole, mountaincar, pendulum. Throws std::invalid_argument
// on anything else.
std::unique_ptr<Environment> make_env(const std::string& name);

// Roll n episodes with a stochastic policy. Each episode gets its own RNG
// stream derived from rng up front, so results do not depend on collection
// order. Verifies |r| <= r_max and the implied return bound at runtime.
Batch collect_trajectories(const Environment& env,
                           const LinearGaussianPolicy& policy, int n,
                           int horizon, std::mt19937_64& rng);

// Parameter-based collection: theta_i ~ hyper, one episode each under the
// deterministic linear policy theta_i.
Batch collect_parameter_batch(const Environment& env,
                              const GaussianHyperpolicy& hyper, int n,
                              int horizon, std::mt19937_64& rng);

// Exact optimal expected discounted return of the LQG task by backward
// Riccati recursion (the clipping boxes are inactive from the start region
// under optimal control).
double lqg_optimal_return(const Lqg1d& env, int horizon, double gamma);

}  // namespace pois
