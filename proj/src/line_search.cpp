#include "pois/line_search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pois {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double next_epsilon(double eps, double dl, double eta) {
  if (dl > eps * (2.0 * eta - 1.0) / (2.0 * eta)) return eta * eps;
  return eps * eps / (2.0 * (eps - dl));
}

LineSearchResult parabolic_line_search(
    const std::function<double(double)>& loss, double grad_norm_sq,
    const LineSearchConfig& cfg) {
  if (!(grad_norm_sq > 0.0) || !std::isfinite(grad_norm_sq))
    throw std::invalid_argument(
        "parabolic_line_search: grad_norm_sq must be positive and finite");
  const double base = loss(0.0);
  if (!std::isfinite(base))
    throw std::invalid_argument("parabolic_line_search: loss(0) not finite");

  double eps = 1.0;
  double alpha_prev = 0.0, dl_prev = -kInf;
  LineSearchResult out;
  for (int l = 1; l <= cfg.max_attempts; ++l) {
    const double alpha = eps / grad_norm_sq;
    double dl = loss(alpha) - base;
    ++out.attempts;
    // NaN or +inf can only come from degenerate weights; treat both as
    // arbitrarily bad probes, like the -inf marker.
    if (std::isnan(dl) || dl == kInf) dl = -kInf;
    if (dl < dl_prev + cfg.tol_dl) break;  // improvement stalled
    if (dl != -kInf) {
      alpha_prev = alpha;
      dl_prev = dl;
    }
    // The parabola through an arbitrarily bad probe extrapolates eps to ~0,
    // ending the search while improving steps may exist at moderate eps.
    // Cap the per-probe shrink so backtracking out of the degenerate region
    // stays geometric.
    eps = std::max(next_epsilon(eps, dl, cfg.eta), eps / 16.0);
  }
  if (dl_prev > 0.0) {
    out.alpha_star = alpha_prev;
    out.delta_l = dl_prev;
  }
  return out;
}

}  // namespace pois
