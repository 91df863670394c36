#include "cmx/estimators.hpp"

namespace cmx {

namespace {
void check_finite(const Vec& v, const char* name) {
  if (!v.allFinite())
    throw NumericalFailure(std::string("non-finite estimator: ") + name);
}
void check_finite(const Mat& m, const char* name) {
  if (!m.allFinite())
    throw NumericalFailure(std::string("non-finite estimator: ") + name);
}
}  // namespace

EstimatorState init_state(const CompositionalOracle& oracle, const Vec& x1, const Vec& y1,
                          const SampleToken& inner, bool project_initial, double c_g) {
  EstimatorState st;
  InnerEval ie = oracle.eval_inner(x1, inner);
  st.u = ie.value;
  st.v_prime = project_initial ? ball_project(ie.jacobian, c_g) : ie.jacobian;
  OuterEval oe = oracle.eval_outer(st.u, y1, inner);
  st.v_dprime = oe.grad_g;
  st.w = oe.grad_y;
  st.prev_x = x1;
  st.prev_u = st.u;
  st.prev_y = y1;
  st.t = 1;
  check_finite(st.u, "u");
  check_finite(st.v_prime, "v_prime");
  check_finite(st.v_dprime, "v_dprime");
  check_finite(st.w, "w");
  return st;
}

AdvanceResult advance(EstimatorState& state, const Vec& x_t, const Vec& y_t,
                      const SampleToken& inner, const SampleToken& outer,
                      const CompositionalOracle& oracle, const Schedule& s, double c_g) {
  if (state.t < 1) throw ConfigError("advance: state not initialized");
  const double beta = s.beta(state.t + 1);
  const double alpha = s.alpha(state.t + 1);

  InnerEval curr = oracle.eval_inner(x_t, inner);
  InnerEval prev = oracle.eval_inner(state.prev_x, inner);

  Vec u_new = storm_update(state.u, curr.value, prev.value, beta);
  check_finite(u_new, "u");
  Mat vp_new = ball_project(storm_update(state.v_prime, curr.jacobian, prev.jacobian, beta), c_g);
  check_finite(vp_new, "v_prime");

  OuterEval oc = oracle.eval_outer(u_new, y_t, outer);
  OuterEval op = oracle.eval_outer(state.prev_u, state.prev_y, outer);

  Vec vpp_new = storm_update(state.v_dprime, oc.grad_g, op.grad_g, beta);
  check_finite(vpp_new, "v_dprime");
  Vec w_new = storm_update(state.w, oc.grad_y, op.grad_y, alpha);
  check_finite(w_new, "w");

  state.u = std::move(u_new);
  state.v_prime = std::move(vp_new);
  state.v_dprime = std::move(vpp_new);
  state.w = std::move(w_new);
  state.prev_x = x_t;
  state.prev_u = state.u;
  state.prev_y = y_t;
  state.t += 1;

  AdvanceResult r;
  r.v = state.v_prime.transpose() * state.v_dprime;
  check_finite(r.v, "v");
  r.raw_grad_g = std::move(oc.grad_g);
  r.raw_grad_y = std::move(oc.grad_y);
  return r;
}

}  // namespace cmx
