#pragma once

#include <Eigen/Core>

#include <vector>

namespace pois {

// One rollout. states holds the initial state plus one entry per step, so
// states.size() == actions.size() + 1; rewards aligns with actions.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> rewards;
  bool terminated = false;  // env signalled done before the horizon cap

  int length() const { return static_cast<int>(actions.size()); }
};

// Discounted return sum_t gamma^t r_t.
double trajectory_return(const Trajectory& traj, double gamma);

}  // namespace pois
