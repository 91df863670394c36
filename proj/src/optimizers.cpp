#include "cmx/optimizers.hpp"

#include <cmath>

namespace cmx {

const char* method_name(const MethodConfig& cfg) {
  struct V {
    const char* operator()(const NstormConfig&) const { return "nstorm"; }
    const char* operator()(const PlConfig&) const { return "nstorm_pl"; }
    const char* operator()(const AdaNstormConfig&) const { return "ada_nstorm"; }
    const char* operator()(const ScgdaConfig&) const { return "scgda"; }
    const char* operator()(const SgdaConfig&) const { return "sgda"; }
  };
  return std::visit(V{}, cfg);
}

long method_iterations(const MethodConfig& cfg) {
  return std::visit([](const auto& c) { return c.T; }, cfg);
}

namespace {

void apply_projection(Iterates& it, const CompositionalOracle& oracle, bool enabled) {
  if (!enabled) return;
  it.x = oracle.project_x(it.x);
  it.y = oracle.project_y(it.y);
}

}  // namespace

StepOutput nstorm_step(Iterates& it, EstimatorState& est, const NstormConfig& cfg,
                       const CompositionalOracle& oracle, Rng& rng) {
  SampleToken inner = oracle.draw_inner_sample(rng);
  SampleToken outer = oracle.draw_outer_sample(rng);
  AdvanceResult adv = advance(est, it.x, it.y, inner, outer, oracle, cfg.schedule, cfg.c_g);
  const double eta = cfg.schedule.eta(est.t);
  it.x -= cfg.gamma * eta * adv.v;
  it.y += eta * est.w;
  apply_projection(it, oracle, cfg.project_feasible);
  return {std::move(adv.v), est.w, eta};
}

StepOutput pl_step(Iterates& it, EstimatorState& est, const PlConfig& cfg,
                   const CompositionalOracle& oracle, Rng& rng) {
  SampleToken inner = oracle.draw_inner_sample(rng);
  SampleToken outer = oracle.draw_outer_sample(rng);
  AdvanceResult adv = advance(est, it.x, it.y, inner, outer, oracle, cfg.schedule, cfg.c_g);
  const double eta = cfg.schedule.eta(est.t);
  // x_tilde = x - gamma v, x' = x + eta (x_tilde - x); same for y with lambda.
  it.x -= cfg.gamma * eta * adv.v;
  it.y += cfg.lambda * eta * est.w;
  apply_projection(it, oracle, cfg.project_feasible);
  return {std::move(adv.v), est.w, eta};
}

StepOutput ada_nstorm_step(Iterates& it, EstimatorState& est, GeneratorState& gen,
                           const AdaNstormConfig& cfg, const CompositionalOracle& oracle,
                           Rng& rng) {
  SampleToken inner = oracle.draw_inner_sample(rng);
  SampleToken outer = oracle.draw_outer_sample(rng);
  AdvanceResult adv = advance(est, it.x, it.y, inner, outer, oracle, cfg.schedule, cfg.c_g);
  const double eta = cfg.schedule.eta(est.t);

  const Vec* aux_x = nullptr;
  const Vec* aux_y = nullptr;
  Vec belief_x;
  if (cfg.generator == GeneratorKind::AdaBelief) {
    belief_x = est.v_prime.transpose() * adv.raw_grad_g;
    aux_x = &belief_x;
    aux_y = &adv.raw_grad_y;
  }
  GeneratorOutput ab = generator_update(cfg.generator, gen, adv.v, est.w, aux_x, aux_y,
                                        cfg.tau, cfg.rho, cfg.bound_lower, cfg.bound_upper);

  // x_tilde = x - gamma A^-1 v; momentum step x' = x + eta (x_tilde - x).
  // The y sub-problem is a maximization, so y_tilde ascends.
  it.x -= cfg.gamma * eta * adv.v.cwiseQuotient(ab.a_diag);
  it.y += cfg.lambda * eta * est.w.cwiseQuotient(ab.b_diag);
  apply_projection(it, oracle, cfg.project_feasible);
  return {std::move(adv.v), est.w, eta};
}

StepOutput scgda_step(Iterates& it, BaselineState& st, const ScgdaConfig& cfg,
                      const CompositionalOracle& oracle, Rng& rng) {
  if (st.t < 1) throw ConfigError("scgda_step: state not initialized");
  SampleToken inner = oracle.draw_inner_sample(rng);
  SampleToken outer = oracle.draw_outer_sample(rng);
  const double beta = cfg.schedule.beta(st.t + 1);

  InnerEval ie = oracle.eval_inner(it.x, inner);
  st.u = (1.0 - beta) * st.u + beta * ie.value;
  OuterEval oe = oracle.eval_outer(st.u, it.y, outer);
  Vec v = ie.jacobian.transpose() * oe.grad_g;
  if (!v.allFinite() || !oe.grad_y.allFinite())
    throw NumericalFailure("non-finite estimator: scgda gradient");
  st.t += 1;
  const double eta = cfg.schedule.eta(st.t);
  it.x -= cfg.gamma * eta * v;
  it.y += eta * oe.grad_y;
  apply_projection(it, oracle, cfg.project_feasible);
  return {std::move(v), std::move(oe.grad_y), eta};
}

StepOutput sgda_step(Iterates& it, long& t, const SgdaConfig& cfg,
                     const CompositionalOracle& oracle, Rng& rng) {
  SampleToken inner = oracle.draw_inner_sample(rng);
  SampleToken outer = oracle.draw_outer_sample(rng);
  InnerEval ie = oracle.eval_inner(it.x, inner);
  OuterEval oe = oracle.eval_outer(ie.value, it.y, outer);
  Vec v = ie.jacobian.transpose() * oe.grad_g;
  if (!v.allFinite() || !oe.grad_y.allFinite())
    throw NumericalFailure("non-finite estimator: sgda gradient");
  t += 1;
  const double eta = cfg.schedule.eta(t);
  it.x -= cfg.gamma * eta * v;
  it.y += eta * oe.grad_y;
  apply_projection(it, oracle, cfg.project_feasible);
  return {std::move(v), std::move(oe.grad_y), eta};
}

Vec init_y(const CompositionalOracle& oracle, const Vec& x1, const YInitPolicy& policy) {
  const Dims d = oracle.dims();
  switch (policy.kind) {
    case YInitPolicy::Kind::ExactYStar: {
      if (!oracle.capabilities().has_y_star)
        throw ConfigError("y init: exact_y_star requested but oracle lacks the capability");
      return oracle.y_star(x1);
    }
    case YInitPolicy::Kind::Given: {
      if (policy.given.size() != d.dy)
        throw ConfigError("y init: given vector has the wrong dimension");
      return policy.given;
    }
    case YInitPolicy::Kind::InnerAscent: {
      const OracleCapabilities caps = oracle.capabilities();
      if (!caps.has_exact_inner || !caps.has_exact_outer)
        throw ConfigError("y init: inner_ascent requires exact inner and outer oracles");
      const Vec u = oracle.exact_g(x1);
      // Crude smoothness estimate from random gradient differences.
      Rng probe(0);
      std::normal_distribution<double> nd(0.0, 1.0);
      double lips = 0.0;
      for (int k = 0; k < 10; ++k) {
        Vec ya(d.dy), yb(d.dy);
        for (Index i = 0; i < d.dy; ++i) ya[i] = nd(probe);
        for (Index i = 0; i < d.dy; ++i) yb[i] = nd(probe);
        const double dist = (ya - yb).norm();
        if (dist < 1e-12) continue;
        const double gdist =
            (oracle.exact_grad_y_f(u, ya) - oracle.exact_grad_y_f(u, yb)).norm();
        lips = std::max(lips, gdist / dist);
      }
      const double step = lips > 0.0 ? 1.0 / lips : 1.0;
      Vec y = oracle.project_y(Vec::Zero(d.dy));
      for (int k = 0; k < policy.ascent_steps; ++k)
        y = oracle.project_y(y + step * oracle.exact_grad_y_f(u, y));
      return y;
    }
  }
  throw ConfigError("y init: unknown policy");
}

namespace {

struct RunDriver {
  const CompositionalOracle& oracle;
  const Vec& x1;
  const YInitPolicy& yinit;
  Rng& rng;
  long log_every;
  const StepObserver& obs;

  Trajectory traj;
  Iterates it;
  long samples = 0;
  double plen = 0.0;

  void record(long t, long T, double eta, const Vec& v, const Vec& w,
              const EstimatorState* est) {
    if (obs) obs(StepView{t, samples, eta, plen, it.x, it.y, v, w, est});
    if (t == 1 || t == T || (log_every > 0 && t % log_every == 0))
      traj.points.push_back({t, samples, eta, plen, it.x, it.y, v, w});
  }

  template <typename Cfg, typename StepFn>
  Trajectory run_storm_family(const Cfg& cfg, StepFn step) {
    cfg.validate();
    it = {x1, init_y(oracle, x1, yinit)};
    SampleToken inner = oracle.draw_inner_sample(rng);
    samples = 1;
    EstimatorState est = init_state(oracle, it.x, it.y, inner, cfg.project_initial, cfg.c_g);
    Vec v1 = est.v_prime.transpose() * est.v_dprime;
    record(1, cfg.T, cfg.schedule.eta(1), v1, est.w, &est);
    for (long t = 2; t <= cfg.T; ++t) {
      const Iterates before = it;
      StepOutput out = step(est);
      samples += 2;
      plen += std::sqrt((it.x - before.x).squaredNorm() + (it.y - before.y).squaredNorm());
      record(t, cfg.T, out.eta, out.v, out.w, &est);
    }
    traj.total_samples = samples;
    return std::move(traj);
  }

  Trajectory operator()(const NstormConfig& cfg) {
    return run_storm_family(cfg, [&](EstimatorState& est) {
      return nstorm_step(it, est, cfg, oracle, rng);
    });
  }

  Trajectory operator()(const PlConfig& cfg) {
    return run_storm_family(cfg, [&](EstimatorState& est) {
      return pl_step(it, est, cfg, oracle, rng);
    });
  }

  Trajectory operator()(const AdaNstormConfig& cfg) {
    GeneratorState gen = GeneratorState::zeros(oracle.dims().dx, oracle.dims().dy);
    return run_storm_family(cfg, [&, gen](EstimatorState& est) mutable {
      return ada_nstorm_step(it, est, gen, cfg, oracle, rng);
    });
  }

  Trajectory operator()(const ScgdaConfig& cfg) {
    cfg.validate();
    it = {x1, init_y(oracle, x1, yinit)};
    SampleToken inner = oracle.draw_inner_sample(rng);
    samples = 1;
    BaselineState st{oracle.eval_inner(it.x, inner).value, 1};
    const Vec zx = Vec::Zero(oracle.dims().dx);
    const Vec zy = Vec::Zero(oracle.dims().dy);
    record(1, cfg.T, cfg.schedule.eta(1), zx, zy, nullptr);
    for (long t = 2; t <= cfg.T; ++t) {
      const Iterates before = it;
      StepOutput out = scgda_step(it, st, cfg, oracle, rng);
      samples += 2;
      plen += std::sqrt((it.x - before.x).squaredNorm() + (it.y - before.y).squaredNorm());
      record(t, cfg.T, out.eta, out.v, out.w, nullptr);
    }
    traj.total_samples = samples;
    return std::move(traj);
  }

  Trajectory operator()(const SgdaConfig& cfg) {
    cfg.validate();
    it = {x1, init_y(oracle, x1, yinit)};
    long t = 1;
    const Vec zx = Vec::Zero(oracle.dims().dx);
    const Vec zy = Vec::Zero(oracle.dims().dy);
    record(1, cfg.T, cfg.schedule.eta(1), zx, zy, nullptr);
    while (t < cfg.T) {
      const Iterates before = it;
      StepOutput out = sgda_step(it, t, cfg, oracle, rng);
      samples += 2;
      plen += std::sqrt((it.x - before.x).squaredNorm() + (it.y - before.y).squaredNorm());
      record(t, cfg.T, out.eta, out.v, out.w, nullptr);
    }
    traj.total_samples = samples;
    return std::move(traj);
  }
};

}  // namespace

Trajectory run_method(const CompositionalOracle& oracle, const MethodConfig& cfg,
                      const Vec& x1, const YInitPolicy& yinit, Rng& rng,
                      long log_every, const StepObserver& obs) {
  require_finite(x1, "x1");
  RunDriver driver{oracle, x1, yinit, rng, log_every, obs};
  return std::visit(driver, cfg);
}

double path_length(const Trajectory& traj) {
  if (traj.points.size() < 2)
    throw Error("path_length: need at least 2 logged points");
  double total = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const auto& a = traj.points[i - 1];
    const auto& b = traj.points[i];
    total += std::sqrt((b.x - a.x).squaredNorm() + (b.y - a.y).squaredNorm());
  }
  return total;
}

}  // namespace cmx
