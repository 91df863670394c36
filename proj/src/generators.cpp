#include "cmx/generators.hpp"

namespace cmx {

GeneratorOutput generator_update(GeneratorKind kind, GeneratorState& g, const Vec& v,
                                 const Vec& w, const Vec* aux_x, const Vec* aux_y,
                                 double tau, double rho, double bound_lower,
                                 double bound_upper) {
  if (!v.allFinite() || !w.allFinite())
    throw NumericalFailure("generator_update: non-finite gradient estimate");
  if (!(rho > 0)) throw ConfigError("generator_update: rho must be positive");

  switch (kind) {
    case GeneratorKind::Adam:
      g.a = tau * g.a + (1.0 - tau) * v.cwiseProduct(v);
      g.b = tau * g.b + (1.0 - tau) * w.cwiseProduct(w);
      break;
    case GeneratorKind::AmsGrad:
      g.a_raw = tau * g.a_raw + (1.0 - tau) * v.cwiseProduct(v);
      g.b_raw = tau * g.b_raw + (1.0 - tau) * w.cwiseProduct(w);
      g.a = g.a.cwiseMax(g.a_raw);
      g.b = g.b.cwiseMax(g.b_raw);
      break;
    case GeneratorKind::AdaBelief: {
      if (aux_x == nullptr || aux_y == nullptr)
        throw ConfigError("generator_update: AdaBelief requires raw-gradient aux vectors");
      const Vec dx = *aux_x - v;
      const Vec dy = *aux_y - w;
      g.a = tau * g.a + (1.0 - tau) * dx.cwiseProduct(dx);
      g.b = tau * g.b + (1.0 - tau) * dy.cwiseProduct(dy);
      break;
    }
    case GeneratorKind::AdaBound:
      if (!(bound_lower >= 0.0) || !(bound_upper >= bound_lower))
        throw ConfigError("generator_update: AdaBound requires 0 <= C_l <= C_u");
      g.a_raw = tau * g.a_raw + (1.0 - tau) * v.cwiseProduct(v);
      g.b_raw = tau * g.b_raw + (1.0 - tau) * w.cwiseProduct(w);
      g.a = g.a_raw.cwiseMax(bound_lower).cwiseMin(bound_upper);
      g.b = g.b_raw.cwiseMax(bound_lower).cwiseMin(bound_upper);
      break;
  }

  GeneratorOutput out;
  out.a_diag = g.a.cwiseSqrt().array() + rho;
  out.b_diag = g.b.cwiseSqrt().array() + rho;
  return out;
}

}  // namespace cmx
