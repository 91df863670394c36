#pragma once

#include "cmx/types.hpp"

namespace cmx {

enum class GeneratorKind { Adam, AmsGrad, AdaBelief, AdaBound };

// Diagonal second-moment accumulators for the adaptive matrices A_t, B_t.
// a_raw/b_raw are the auxiliary pre-max (AMSGrad) / pre-clip (AdaBound)
// accumulators; unused by the other generators.
struct GeneratorState {
  Vec a;       // dx
  Vec b;       // dy
  Vec a_raw;
  Vec b_raw;

  static GeneratorState zeros(Index dx, Index dy) {
    GeneratorState g;
    g.a = Vec::Zero(dx);
    g.b = Vec::Zero(dy);
    g.a_raw = Vec::Zero(dx);
    g.b_raw = Vec::Zero(dy);
    return g;
  }
};

struct GeneratorOutput {
  Vec a_diag;  // diag of A_t = sqrt(a) + rho, every entry >= rho
  Vec b_diag;  // diag of B_t
};

// One accumulator update producing the diagonals of A_t and B_t.
// For AdaBelief, aux_x carries v_prime^T grad_g f(u_t, y_t; zeta_t) and aux_y
// the raw grad_y f(u_t, y_t; zeta_t); both required, else ConfigError.
// bound_lower/bound_upper apply to AdaBound only.
GeneratorOutput generator_update(GeneratorKind kind, GeneratorState& g, const Vec& v,
                                 const Vec& w, const Vec* aux_x, const Vec* aux_y,
                                 double tau, double rho, double bound_lower = 0.0,
                                 double bound_upper = 0.0);

}  // namespace cmx
