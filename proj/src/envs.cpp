#include "pois/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace pois {

namespace {

double clip(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

Eigen::VectorXd scalar_state(double x) {
  Eigen::VectorXd s(1);
  s[0] = x;
  return s;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

Eigen::VectorXd box1(double v) { return scalar_state(v); }

}  // namespace

const LinearGaussianPolicy& Batch::behavioral_policy() const {
  if (parameter_based())
    throw std::logic_error("Batch: parameter-based batch has no action policy");
  return std::get<LinearGaussianPolicy>(behavioral);
}

const GaussianHyperpolicy& Batch::behavioral_hyper() const {
  if (!parameter_based())
    throw std::logic_error("Batch: action-based batch has no hyperpolicy");
  return std::get<GaussianHyperpolicy>(behavioral);
}

// ---------------------------------------------------------------- Lqg1d ---

Lqg1d::Lqg1d(double state_cost, double action_cost, int horizon, double gamma)
    : state_cost_(state_cost), action_cost_(action_cost) {
  spec_.state_dim = 1;
  spec_.action_dim = 1;
  spec_.horizon = horizon;
  spec_.gamma = gamma;
  spec_.r_max = state_cost * 16.0 + action_cost * 4.0;  // |x|<=4, |a|<=2
  spec_.action_low = box1(-2.0);
  spec_.action_high = box1(2.0);
}

Eigen::VectorXd Lqg1d::reset(std::mt19937_64& rng) const {
  return scalar_state(uniform(rng, -1.0, 1.0));
}

StepResult Lqg1d::step(const Eigen::VectorXd& state,
                       const Eigen::VectorXd& action) const {
  const double x = state[0];
  const double a = clip(action[0], -2.0, 2.0);
  StepResult out;
  out.next_state = scalar_state(clip(x + a, -4.0, 4.0));
  out.reward = -(state_cost_ * x * x + action_cost_ * a * a);
  out.done = false;
  return out;
}

// ------------------------------------------------------------- CartPole ---

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceScale = 10.0;
constexpr double kDt = 0.02;
constexpr double kXLimit = 2.4;
constexpr double kThetaLimit = 0.2;
}  // namespace cartpole

CartPole::CartPole() {
  spec_.state_dim = 4;
  spec_.action_dim = 1;
  spec_.horizon = 500;
  spec_.gamma = 1.0;
  spec_.r_max = 10.0;
  spec_.action_low = box1(-1.0);
  spec_.action_high = box1(1.0);
}

Eigen::VectorXd CartPole::reset(std::mt19937_64& rng) const {
  Eigen::VectorXd s(4);
  for (int k = 0; k < 4; ++k) s[k] = uniform(rng, -0.05, 0.05);
  return s;
}

StepResult CartPole::step(const Eigen::VectorXd& state,
                          const Eigen::VectorXd& action) const {
  using namespace cartpole;
  const double x = state[0], x_dot = state[1];
  const double theta = state[2], theta_dot = state[3];
  const double a = clip(action[0], -1.0, 1.0);
  const double force = kForceScale * a;

  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  StepResult out;
  out.next_state = Eigen::VectorXd(4);
  out.next_state << x + kDt * x_dot, x_dot + kDt * x_acc,
      theta + kDt * theta_dot, theta_dot + kDt * theta_acc;
  out.reward = 10.0 - (1.0 - cos_t) - 1e-5 * a * a;
  out.done = std::abs(out.next_state[0]) > kXLimit ||
             std::abs(out.next_state[2]) > kThetaLimit;
  return out;
}

// ---------------------------------------------------------- MountainCar ---

MountainCar::MountainCar() {
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.horizon = 500;
  spec_.gamma = 1.0;
  spec_.r_max = 1.0;
  spec_.action_low = box1(-1.0);
  spec_.action_high = box1(1.0);
}

Eigen::VectorXd MountainCar::reset(std::mt19937_64& rng) const {
  Eigen::VectorXd s(2);
  s[0] = uniform(rng, -0.6, -0.4);
  s[1] = 0.0;
  return s;
}

StepResult MountainCar::step(const Eigen::VectorXd& state,
                             const Eigen::VectorXd& action) const {
  const double a = clip(action[0], -1.0, 1.0);
  double v = state[1] + 0.0015 * a - 0.0025 * std::cos(3.0 * state[0]);
  v = clip(v, -0.07, 0.07);
  double x = clip(state[0] + v, -1.2, 0.6);
  if (x <= -1.2 && v < 0.0) v = 0.0;  // inelastic wall on the left

  StepResult out;
  out.next_state = Eigen::VectorXd(2);
  out.next_state << x, v;
  out.reward = -1.0;
  out.done = x >= 0.45;
  return out;
}

// ------------------------------------------------------------- Pendulum ---

namespace pendulum {
constexpr double kGravity = 9.8;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.02;
constexpr double kTorqueScale = 2.0;
constexpr double kMaxSpeed = 8.0;
constexpr double kThetaLimit = M_PI / 2.0;
}  // namespace pendulum

Pendulum::Pendulum() {
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.horizon = 500;
  spec_.gamma = 1.0;
  spec_.r_max = 10.0;
  spec_.action_low = box1(-1.0);
  spec_.action_high = box1(1.0);
}

Eigen::VectorXd Pendulum::reset(std::mt19937_64& rng) const {
  Eigen::VectorXd s(2);
  s[0] = uniform(rng, -0.1, 0.1);
  s[1] = uniform(rng, -0.1, 0.1);
  return s;
}

StepResult Pendulum::step(const Eigen::VectorXd& state,
                          const Eigen::VectorXd& action) const {
  using namespace pendulum;
  const double theta = state[0], theta_dot = state[1];
  const double a = clip(action[0], -1.0, 1.0);
  const double torque = kTorqueScale * a;

  const double theta_acc = kGravity / kLength * std::sin(theta) +
                           torque / (kMass * kLength * kLength);
  const double new_dot =
      clip(theta_dot + kDt * theta_acc, -kMaxSpeed, kMaxSpeed);
  const double new_theta = theta + kDt * theta_dot;

  StepResult out;
  out.next_state = Eigen::VectorXd(2);
  out.next_state << new_theta, new_dot;
  out.reward =
      -(theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
  out.done = std::abs(new_theta) > kThetaLimit;
  return out;
}

// ------------------------------------------------------------- plumbing ---

std::unique_ptr<Environment> make_env(const std::string& name) {
  if (name == "lqg") return std::make_unique<Lqg1d>();
  if (name == "cartpole") return std::make_unique<CartPole>();
  if (name == "mountaincar") return std::make_unique<MountainCar>();
  if (name == "pendulum") return std::make_unique<Pendulum>();
  throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

namespace {

// Upper bound on |discounted return| for the runtime sanity check.
double return_bound(const EnvSpec& spec, int horizon, double gamma) {
  if (gamma == 1.0) return spec.r_max * horizon;
  return spec.r_max * (1.0 - std::pow(gamma, horizon)) / (1.0 - gamma);
}

template <class ActFn>
Trajectory roll_episode(const Environment& env, int horizon, uint64_t seed,
                        ActFn&& act) {
  std::mt19937_64 ep_rng(seed);
  const EnvSpec& spec = env.spec();
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);

  Eigen::VectorXd s = env.reset(ep_rng);
  traj.states.push_back(s);
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd a = act(s, ep_rng);
    StepResult r = env.step(s, a);
    if (std::abs(r.reward) > spec.r_max + 1e-12)
      throw std::logic_error("collect: reward exceeds declared r_max");
    traj.actions.push_back(std::move(a));
    traj.rewards.push_back(r.reward);
    s = std::move(r.next_state);
    traj.states.push_back(s);
    if (r.done) {
      traj.terminated = true;
      break;
    }
  }
  const double ret = trajectory_return(traj, spec.gamma);
  if (std::abs(ret) > return_bound(spec, horizon, spec.gamma) + 1e-9)
    throw std::logic_error("collect: trajectory return exceeds bound");
  return traj;
}

std::vector<uint64_t> episode_seeds(std::mt19937_64& rng, int n) {
  std::vector<uint64_t> seeds(n);
  for (auto& s : seeds) s = rng();
  return seeds;
}

}  // namespace

Batch collect_trajectories(const Environment& env,
                           const LinearGaussianPolicy& policy, int n,
                           int horizon, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("collect_trajectories: n must be >= 1");
  const auto seeds = episode_seeds(rng, n);
  Batch batch{{}, {}, policy};
  batch.trajectories.reserve(n);
  for (int i = 0; i < n; ++i)
    batch.trajectories.push_back(roll_episode(
        env, horizon, seeds[i],
        [&](const Eigen::VectorXd& s, std::mt19937_64& ep_rng) {
          return policy.act(s, ep_rng);
        }));
  return batch;
}

Batch collect_parameter_batch(const Environment& env,
                              const GaussianHyperpolicy& hyper, int n,
                              int horizon, std::mt19937_64& rng) {
  if (n < 1)
    throw std::invalid_argument("collect_parameter_batch: n must be >= 1");
  const auto seeds = episode_seeds(rng, n);
  const int sdim = env.spec().state_dim, adim = env.spec().action_dim;
  Batch batch{{}, {}, hyper};
  batch.trajectories.reserve(n);
  batch.thetas.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 ep_rng(seeds[i]);
    Eigen::VectorXd theta = hyper.sample(ep_rng);
    DeterministicLinearPolicy policy(adim, sdim, theta);
    // Continue the same stream for the env reset.
    Trajectory traj = roll_episode(
        env, horizon, ep_rng(),
        [&](const Eigen::VectorXd& s, std::mt19937_64&) { return policy.act(s); });
    batch.thetas.push_back(std::move(theta));
    batch.trajectories.push_back(std::move(traj));
  }
  return batch;
}

double lqg_optimal_return(const Lqg1d& env, int horizon, double gamma) {
  if (horizon < 1)
    throw std::invalid_argument("lqg_optimal_return: horizon must be >= 1");
  const double q = env.state_cost(), r = env.action_cost();
  // V_t(x) = -p_t x^2; backward recursion with optimal gain a = -K x.
  double p = 0.0;
  for (int t = horizon - 1; t >= 0; --t) {
    const double denom = r + gamma * p;
    const double k = denom > 0.0 ? gamma * p / denom : 0.0;
    p = q + r * k * k + gamma * p * (1.0 - k) * (1.0 - k);
  }
  return -p / 3.0;  // E[x0^2] = 1/3 for x0 ~ U[-1, 1]
}

}  // namespace pois
