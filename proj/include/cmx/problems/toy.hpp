#pragma once

#include <memory>

#include "cmx/oracle.hpp"

namespace cmx {

// f(g(x), y) = -2 g^2 + 2 g y - y^2 / 2 with g(x) = 2x.
// y*(x) = 2 g(x) = 4x and Phi(x) = 0 everywhere; the stationary set is
// the line y = 4x. Noise is additive isotropic Gaussian per channel.
class ToyProblem final : public CompositionalOracle {
 public:
  ToyProblem(double noise_value = 0.0, double noise_jac = 0.0, double noise_grad = 0.0);

  Dims dims() const override { return {1, 1, 1}; }
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
  std::optional<double> phi_min() const override { return 0.0; }

 private:
  double sigma_value_;
  double sigma_jac_;
  double sigma_grad_;
};

std::shared_ptr<CompositionalOracle> make_toy(double noise_value = 0.0, double noise_jac = 0.0,
                                              double noise_grad = 0.0);

}  // namespace cmx
