#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pois/policy.hpp"
#include "pois/trajectory.hpp"

#include <cmath>
#include <random>

using namespace pois;

namespace {

Trajectory random_trajectory(int steps, int state_dim, int action_dim,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Trajectory traj;
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd s(state_dim), a(action_dim);
    for (int k = 0; k < state_dim; ++k) s[k] = nd(rng);
    for (int k = 0; k < action_dim; ++k) a[k] = nd(rng);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.rewards.push_back(nd(rng));
  }
  return traj;
}

LinearGaussianPolicy random_policy(int action_dim, int state_dim,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 0.4);
  Eigen::MatrixXd gain(action_dim, state_dim);
  Eigen::VectorXd log_std(action_dim);
  for (int i = 0; i < action_dim; ++i) {
    for (int j = 0; j < state_dim; ++j) gain(i, j) = nd(rng);
    log_std[i] = 0.3 * nd(rng);
  }
  return LinearGaussianPolicy(gain, log_std);
}

}  // namespace

TEST_CASE("discounted return") {
  Trajectory traj;
  traj.rewards = {1.0, 2.0, 4.0};
  CHECK(trajectory_return(traj, 0.5) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(trajectory_return(traj, 1.0) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(trajectory_return(Trajectory{}, 0.9) == doctest::Approx(0.0));
}

TEST_CASE("LinearGaussianPolicy") {
  SUBCASE("parameter layout round-trips and is row-major in the gain") {
    Eigen::MatrixXd gain(2, 2);
    gain << 1.0, 2.0, 3.0, 4.0;
    Eigen::VectorXd ls(2);
    ls << -0.1, 0.2;
    const LinearGaussianPolicy pi(gain, ls);
    const Eigen::VectorXd theta = pi.params();
    REQUIRE(theta.size() == 6);
    CHECK(theta[0] == 1.0);
    CHECK(theta[1] == 2.0);
    CHECK(theta[2] == 3.0);
    CHECK(theta[3] == 4.0);
    CHECK(theta[4] == -0.1);
    CHECK(theta[5] == 0.2);
    const auto back = LinearGaussianPolicy::from_params(2, 2, theta);
    CHECK((back.gain() - gain).norm() == doctest::Approx(0.0));
    CHECK((back.log_std() - ls).norm() == doctest::Approx(0.0));
  }

  SUBCASE("log pdf agrees with the action distribution") {
    std::mt19937_64 rng(3);
    const auto pi = random_policy(2, 3, rng);
    Eigen::VectorXd s(3), a(2);
    s << 0.5, -1.0, 0.25;
    a << 0.3, 0.6;
    CHECK(pi.log_pdf(s, a) ==
          doctest::Approx(pi.action_dist(s).log_pdf(a)).epsilon(1e-14));
    // and the action distribution is centered on the linear map
    CHECK((pi.action_dist(s).mean() - pi.gain() * s).norm() ==
          doctest::Approx(0.0));
  }

  SUBCASE("acting is deterministic given the generator state") {
    std::mt19937_64 rng_a(9), rng_b(9);
    const auto pi = random_policy(2, 2, rng_a);
    std::mt19937_64 r1(123), r2(123);
    Eigen::VectorXd s(2);
    s << 1.0, -1.0;
    CHECK((pi.act(s, r1) - pi.act(s, r2)).norm() == doctest::Approx(0.0));
  }

  SUBCASE("shape validation") {
    CHECK_THROWS_AS(
        LinearGaussianPolicy(Eigen::MatrixXd::Zero(2, 2),
                             Eigen::VectorXd::Zero(3)),
        std::invalid_argument);
    CHECK_THROWS_AS(
        LinearGaussianPolicy::from_params(2, 2, Eigen::VectorXd::Zero(5)),
        std::invalid_argument);
  }
}

TEST_CASE("DeterministicLinearPolicy") {
  Eigen::VectorXd theta(4);
  theta << 1.0, 2.0, 3.0, 4.0;
  const DeterministicLinearPolicy pi(2, 2, theta);
  Eigen::VectorXd s(2);
  s << 1.0, 1.0;
  const Eigen::VectorXd a = pi.act(s);
  CHECK(a[0] == doctest::Approx(3.0));
  CHECK(a[1] == doctest::Approx(7.0));
  CHECK_THROWS_AS(DeterministicLinearPolicy(2, 2, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("GaussianHyperpolicy") {
  SUBCASE("round trip and log pdf") {
    Eigen::VectorXd mu(2), sl(2);
    mu << 0.5, -0.25;
    sl << 0.1, -0.3;
    const GaussianHyperpolicy nu(mu, sl);
    const auto back = GaussianHyperpolicy::from_params(nu.params());
    CHECK((back.mu() - mu).norm() == doctest::Approx(0.0));
    CHECK((back.sigma_log() - sl).norm() == doctest::Approx(0.0));
    Eigen::VectorXd theta(2);
    theta << 0.2, 0.2;
    CHECK(nu.log_pdf(theta) ==
          doctest::Approx(nu.distribution().log_pdf(theta)).epsilon(1e-14));
    CHECK_THROWS_AS(GaussianHyperpolicy::from_params(Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
  }
}

TEST_CASE("importance weights") {
  std::mt19937_64 rng(31);
  const auto behavioral = random_policy(2, 3, rng);
  const auto target = random_policy(2, 3, rng);
  const auto traj = random_trajectory(5, 3, 2, rng);

  SUBCASE("on-policy log weight vanishes") {
    CHECK(traj_log_weight(traj, behavioral, behavioral) ==
          doctest::Approx(0.0));
  }

  SUBCASE("trajectory weight is the product of per-step density ratios") {
    double acc = 0.0;
    for (size_t t = 0; t < traj.states.size(); ++t)
      acc += target.action_dist(traj.states[t]).log_pdf(traj.actions[t]) -
             behavioral.action_dist(traj.states[t]).log_pdf(traj.actions[t]);
    CHECK(traj_log_weight(traj, target, behavioral) ==
          doctest::Approx(acc).epsilon(1e-13));
  }

  SUBCASE("hyperpolicy weight matches the Gaussian density ratio") {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(3), sl = Eigen::VectorXd::Zero(3);
    const GaussianHyperpolicy q(mu, sl);
    Eigen::VectorXd mu2(3), sl2(3);
    mu2 << 0.1, -0.2, 0.3;
    sl2 << 0.05, 0.0, -0.1;
    const GaussianHyperpolicy p(mu2, sl2);
    Eigen::VectorXd theta(3);
    theta << 0.5, 0.0, -0.5;
    CHECK(hyper_log_weight(theta, p, q) ==
          doctest::Approx(p.log_pdf(theta) - q.log_pdf(theta)).epsilon(1e-13));
    CHECK(hyper_log_weight(theta, q, q) == doctest::Approx(0.0));
  }
}

TEST_CASE("scores against finite differences") {
  std::mt19937_64 rng(57);

  SUBCASE("trajectory score") {
    for (int rep = 0; rep < 5; ++rep) {
      const int sdim = 1 + rep % 3, adim = 1 + rep % 2;
      const auto pi = random_policy(adim, sdim, rng);
      const auto traj = random_trajectory(4, sdim, adim, rng);
      auto loglik = [&](const Eigen::VectorXd& theta) {
        const auto cand = LinearGaussianPolicy::from_params(adim, sdim, theta);
        double acc = 0.0;
        for (size_t t = 0; t < traj.states.size(); ++t)
          acc += cand.log_pdf(traj.states[t], traj.actions[t]);
        return acc;
      };
      const Eigen::VectorXd analytic = traj_score(traj, pi);
      const Eigen::VectorXd numeric =
          oracles::fd_gradient(loglik, pi.params(), 1e-6);
      REQUIRE(analytic.size() == numeric.size());
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() <
            1e-6 * std::max(1.0, analytic.cwiseAbs().maxCoeff()));
    }
  }

  SUBCASE("hyperpolicy score") {
    std::normal_distribution<double> nd(0.0, 0.5);
    for (int rep = 0; rep < 5; ++rep) {
      const int dim = 2 + rep;
      Eigen::VectorXd mu(dim), sl(dim), theta(dim);
      for (int k = 0; k < dim; ++k) {
        mu[k] = nd(rng);
        sl[k] = 0.4 * nd(rng);
        theta[k] = nd(rng);
      }
      const GaussianHyperpolicy nu(mu, sl);
      auto loglik = [&](const Eigen::VectorXd& rho) {
        return GaussianHyperpolicy::from_params(rho).log_pdf(theta);
      };
      const Eigen::VectorXd analytic = hyper_score(theta, nu);
      const Eigen::VectorXd numeric =
          oracles::fd_gradient(loglik, nu.params(), 1e-6);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() <
            1e-6 * std::max(1.0, analytic.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("Fisher information") {
  SUBCASE("exact hyperpolicy FIM, frozen") {
    Eigen::VectorXd mu(2), sl(2);
    mu << 0.3, -0.7;
    sl << 0.0, std::log(2.0);
    const auto fim = exact_hyper_fim(GaussianHyperpolicy(mu, sl));
    REQUIRE(fim.size() == 4);
    CHECK(fim[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fim[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(fim[2] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fim[3] == doctest::Approx(2.0).epsilon(1e-14));
  }

  SUBCASE("exact hyperpolicy FIM matches the score covariance") {
    Eigen::VectorXd mu(2), sl(2);
    mu << 0.5, -1.0;
    sl << std::log(0.7), std::log(1.3);
    const GaussianHyperpolicy nu(mu, sl);
    std::mt19937_64 rng(71);
    const int n = 200000;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd sc = hyper_score(nu.sample(rng), nu);
      cov += sc * sc.transpose();
    }
    cov /= n;
    const Eigen::VectorXd fim = exact_hyper_fim(nu);
    for (int i = 0; i < 4; ++i) {
      CHECK(cov(i, i) == doctest::Approx(fim[i]).epsilon(0.05));
      for (int j = 0; j < i; ++j) CHECK(std::abs(cov(i, j)) < 0.05);
    }
  }

  SUBCASE("estimated FIM on-policy converges to the exact one") {
    // One-step trajectories at a fixed state: the exact Fisher matrix is
    // [[s s^T / sigma^2, 0], [0, 2]].
    Eigen::MatrixXd gain(1, 2);
    gain << 0.4, -0.2;
    Eigen::VectorXd ls(1);
    ls << std::log(0.8);
    const LinearGaussianPolicy pi(gain, ls);
    Eigen::VectorXd s0(2);
    s0 << 1.0, 2.0;
    std::mt19937_64 rng(1234);
    std::vector<Trajectory> trajs(50000);
    for (auto& traj : trajs) {
      traj.states.push_back(s0);
      traj.actions.push_back(pi.act(s0, rng));
      traj.rewards.push_back(0.0);
    }
    const Eigen::MatrixXd fim = estimated_fim(trajs, pi, pi, false);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(3, 3);
    expect.topLeftCorner(2, 2) = s0 * s0.transpose() / 0.64;
    expect(2, 2) = 2.0;
    CHECK((fim - expect).cwiseAbs().maxCoeff() < 0.12);
    // on-policy the SN and plain variants coincide exactly
    const Eigen::MatrixXd fim_sn = estimated_fim(trajs, pi, pi, true);
    CHECK((fim - fim_sn).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("self-normalization rescales by the mean weight") {
    std::mt19937_64 rng(4242);
    const auto behavioral = random_policy(1, 2, rng);
    const auto target = random_policy(1, 2, rng);
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 40; ++i)
      trajs.push_back(random_trajectory(3, 2, 1, rng));
    const Eigen::MatrixXd plain = estimated_fim(trajs, target, behavioral, false);
    const Eigen::MatrixXd sn = estimated_fim(trajs, target, behavioral, true);
    double mean_w = 0.0;
    for (const auto& traj : trajs)
      mean_w += std::exp(traj_log_weight(traj, target, behavioral));
    mean_w /= static_cast<double>(trajs.size());
    CHECK((plain - mean_w * sn).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, plain.cwiseAbs().maxCoeff()));
  }
}
