#pragma once

// Parabolic line search: probes step sizes alpha_l = eps_l / grad_norm_sq,
// growing eps by eta while the measured improvement looks superlinear and
// otherwise jumping to the vertex of the parabola through the last probe.
// Stops as soon as an iteration fails to improve on the previous one by at
// least tol_dl and returns the previous probe.

#include <functional>

namespace pois {

struct LineSearchConfig {
  double tol_dl = 1e-4;
  int max_attempts = 30;
  double eta = 2.0;
};

struct LineSearchResult {
  double alpha_star = 0.0;  // accepted step, 0 when nothing improved
  double delta_l = 0.0;     // measured improvement at alpha_star, >= 0
  int attempts = 0;         // probes evaluated (not counting loss(0))
};

// Next trust parameter: eta * eps when dl > eps (2 eta - 1) / (2 eta)
// (the parabola vertex would land at or past eta * eps), otherwise the
// vertex eps^2 / (2 (eps - dl)) of the parabola through (0,0) and (eps, dl)
// with unit slope at 0. Exposed separately because its edge cases are easy
// to get wrong.
double next_epsilon(double eps, double dl, double eta);

// loss maps a step size to the objective value; loss(0) must be finite.
// -inf values (undefined surrogate) are treated as arbitrarily bad probes.
LineSearchResult parabolic_line_search(
    const std::function<double(double)>& loss, double grad_norm_sq,
    const LineSearchConfig& cfg);

}  // namespace pois
