#pragma once

#include <cmath>
#include <algorithm>

#include "cmx/oracle.hpp"
#include "cmx/types.hpp"

namespace cmx {

// Step-size schedule eta(t) = (m + t)^(-1/3) with mixing weights
// beta(t) = c1 * eta(t-1)^2 and alpha(t) = c2 * eta(t-1)^2.
// eta(0) := m^(-1/3) so that beta(1), alpha(1) are well defined.
struct Schedule {
  double m = 8.0;
  double c1 = 1.0;
  double c2 = 1.0;

  Schedule() = default;
  Schedule(double m_, double c1_, double c2_) : m(m_), c1(c1_), c2(c2_) { validate(); }

  void validate() const {
    if (!(m > 0) || !(c1 > 0) || !(c2 > 0))
      throw ConfigError("Schedule: m, c1, c2 must be positive");
    const double c_max = std::max(c1, c2);
    if (!(m > c_max * c_max * c_max))
      throw ConfigError("Schedule: requires m > max(c1^3, c2^3)");
    // beta/alpha are largest at t = 1; they must lie in (0,1) there.
    const double eta0_sq = std::pow(m, -2.0 / 3.0);
    if (!(c1 * eta0_sq < 1.0) || !(c2 * eta0_sq < 1.0))
      throw ConfigError("Schedule: beta(1) or alpha(1) not in (0,1); increase m");
  }

  double eta(long t) const { return std::pow(m + static_cast<double>(t), -1.0 / 3.0); }
  double beta(long t) const {
    const double e = eta(t - 1);
    return c1 * e * e;
  }
  double alpha(long t) const {
    const double e = eta(t - 1);
    return c2 * e * e;
  }
};

// One recursive-momentum update:
//   h_curr + (1 - mix) * (prev_estimate - h_prev)
// which is algebraically the three-term form
//   (1-mix) prev + mix h_curr + (1-mix)(h_curr - h_prev).
template <typename T>
T storm_update(const T& prev_estimate, const T& h_curr, const T& h_prev, double mix) {
  if (prev_estimate.rows() != h_curr.rows() || prev_estimate.cols() != h_curr.cols() ||
      h_prev.rows() != h_curr.rows() || h_prev.cols() != h_curr.cols())
    throw std::invalid_argument("storm_update: shape mismatch");
  if (!(mix > 0.0) || mix > 1.0)
    throw std::invalid_argument("storm_update: mix must be in (0,1]");
  return h_curr + (1.0 - mix) * (prev_estimate - h_prev);
}

// Projection onto the Frobenius ball of the given radius.
template <typename T>
T ball_project(const T& m, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball_project: radius must be positive");
  const double n = m.norm();
  if (n <= radius) return m;
  return m * (radius / n);
}

// The four STORM estimators plus the lagged iterates their recursions need.
struct EstimatorState {
  Vec u;         // inner value estimate, dg
  Mat v_prime;   // inner Jacobian estimate, dg x dx
  Vec v_dprime;  // grad_g f estimate, dg
  Vec w;         // grad_y f estimate, dy
  Vec prev_x;
  Vec prev_u;
  Vec prev_y;
  long t = 0;
};

struct AdvanceResult {
  Vec v;           // composite gradient v_prime^T * v_dprime, dx
  Vec raw_grad_g;  // grad_g f(u_t, y_t; zeta_t), the current one-sample estimate
  Vec raw_grad_y;  // grad_y f(u_t, y_t; zeta_t)
};

// Algorithm line-4 initialization: one inner evaluation seeds u and v_prime,
// and the same token seeds the outer gradient estimates at (u, y1).
// v_prime is not projected here unless project_initial is set.
EstimatorState init_state(const CompositionalOracle& oracle, const Vec& x1, const Vec& y1,
                          const SampleToken& inner, bool project_initial = false,
                          double c_g = 0.0);

// One pass of the four recursions at the current iterates (x_t, y_t).
// Order: u, then v_prime (ball-projected), then v_dprime using the new u,
// then w using the new u. Mixing weights are beta(t+1)/alpha(t+1) for the
// state's pre-increment t. Updates prev_* and increments t.
AdvanceResult advance(EstimatorState& state, const Vec& x_t, const Vec& y_t,
                      const SampleToken& inner, const SampleToken& outer,
                      const CompositionalOracle& oracle, const Schedule& s, double c_g);

}  // namespace cmx
