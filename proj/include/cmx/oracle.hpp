#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cmx/types.hpp"

namespace cmx {

using Rng = std::mt19937_64;

// One recorded realization of the inner sample xi or the outer sample zeta.
// The token stores all randomness drawn for it (Gaussian draws and/or
// minibatch indices), so the same realization can be re-evaluated at two
// different points with bit-identical noise.
struct SampleToken {
  Vec gauss;                       // recorded Gaussian draws, problem-defined layout
  std::vector<std::size_t> idx;    // recorded index draws (minibatch, next-state)
};

struct OracleCapabilities {
  bool has_exact_inner = false;   // exact g(x) and its Jacobian
  bool has_exact_outer = false;   // exact f(u, y), grad_g f, grad_y f
  bool has_y_star = false;        // exact inner maximizer y*(x)
  bool has_phi = false;           // exact Phi(x) = max_y f(g(x), y)
  bool has_grad_phi = false;      // exact grad Phi(x); implies has_y_star

  void validate() const {
    if (has_grad_phi && !has_y_star)
      throw ConfigError("OracleCapabilities: has_grad_phi requires has_y_star");
  }
};

struct InnerEval {
  Vec value;      // dg
  Mat jacobian;   // dg x dx, rows = outputs
};

struct OuterEval {
  Vec grad_g;   // dg
  Vec grad_y;   // dy
};

// A compositional minimax problem min_x max_y f(g(x), y) exposed through
// stochastic two-point oracles plus optional exact oracles for testing.
// Instances are immutable after construction; tokens carry all per-sample
// state, so one oracle may be shared across concurrent runs.
class CompositionalOracle {
 public:
  virtual ~CompositionalOracle() = default;

  virtual Dims dims() const = 0;
  virtual OracleCapabilities capabilities() const = 0;

  virtual SampleToken draw_inner_sample(Rng& rng) const = 0;
  virtual SampleToken draw_outer_sample(Rng& rng) const = 0;

  // Unbiased: E[value] = g(x), E[jacobian] = grad g(x). Deterministic in (x, s).
  virtual InnerEval eval_inner(const Vec& x, const SampleToken& s) const = 0;

  // Unbiased estimates of grad_g f(u, y) and grad_y f(u, y).
  virtual OuterEval eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const = 0;

  // Exact oracles; throw UnsupportedOracle unless the capability is declared.
  virtual Vec exact_g(const Vec& x) const;
  virtual Mat exact_jacobian(const Vec& x) const;
  virtual Vec exact_grad_g_f(const Vec& u, const Vec& y) const;
  virtual Vec exact_grad_y_f(const Vec& u, const Vec& y) const;
  virtual double exact_f(const Vec& u, const Vec& y) const;
  virtual Vec y_star(const Vec& x) const;
  virtual double phi(const Vec& x) const;
  virtual Vec grad_phi(const Vec& x) const;
  virtual std::optional<double> phi_min() const { return std::nullopt; }

  // Euclidean projections onto the feasible sets; identity when unconstrained.
  virtual Vec project_x(const Vec& x) const { return x; }
  virtual Vec project_y(const Vec& y) const { return y; }
};

}  // namespace cmx
