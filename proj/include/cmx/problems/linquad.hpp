#pragma once

#include <memory>

#include "cmx/oracle.hpp"

namespace cmx {

// Closed-form strongly-concave test problem:
//   g(x) = A x + b,  f(u, y) = u'P u / 2 + u'Q y - mu ||y||^2 / 2 + c'u.
// y*(x) = Q'(Ax+b)/mu, Phi(x) = u'H u / 2 + c'u with H = P + QQ'/mu,
// which must be positive definite so Phi has a unique minimizer.
struct LinQuadSpec {
  Mat A;     // dg x dx
  Vec b;     // dg
  Mat P;     // dg x dg, symmetric
  Mat Q;     // dg x dy
  Vec c;     // dg
  double mu = 1.0;
  double noise_value = 0.0;
  double noise_jac = 0.0;
  double noise_grad = 0.0;
};

class LinQuadProblem final : public CompositionalOracle {
 public:
  explicit LinQuadProblem(LinQuadSpec spec);

  Dims dims() const override;
  OracleCapabilities capabilities() const override;

  SampleToken draw_inner_sample(Rng& rng) const override;
  SampleToken draw_outer_sample(Rng& rng) const override;
  InnerEval eval_inner(const Vec& x, const SampleToken& s) const override;
  OuterEval eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const override;

  Vec exact_g(const Vec& x) const override;
  Mat exact_jacobian(const Vec& x) const override;
  Vec exact_grad_g_f(const Vec& u, const Vec& y) const override;
  Vec exact_grad_y_f(const Vec& u, const Vec& y) const override;
  double exact_f(const Vec& u, const Vec& y) const override;
  Vec y_star(const Vec& x) const override;
  double phi(const Vec& x) const override;
  Vec grad_phi(const Vec& x) const override;
  std::optional<double> phi_min() const override { return phi_star_; }

  const LinQuadSpec& spec() const { return spec_; }
  const Vec& minimizer() const { return x_star_; }

 private:
  LinQuadSpec spec_;
  Mat H_;          // P + QQ'/mu
  Vec x_star_;
  double phi_star_ = 0.0;
  Index gauss_len_ = 0;
};

// Random well-conditioned instance reproducible from the seed.
std::shared_ptr<CompositionalOracle> make_linquad(Index dx, Index dg, Index dy,
                                                  std::uint64_t seed, double noise_value = 0.0,
                                                  double noise_jac = 0.0,
                                                  double noise_grad = 0.0);
std::shared_ptr<CompositionalOracle> make_linquad(LinQuadSpec spec);

}  // namespace cmx
