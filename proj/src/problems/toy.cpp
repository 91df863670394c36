#include "cmx/problems/toy.hpp"

#include <memory>

namespace cmx {

ToyProblem::ToyProblem(double noise_value, double noise_jac, double noise_grad)
    : sigma_value_(noise_value), sigma_jac_(noise_jac), sigma_grad_(noise_grad) {
  if (sigma_value_ < 0 || sigma_jac_ < 0 || sigma_grad_ < 0)
    throw ConfigError("ToyProblem: noise scales must be nonnegative");
}

OracleCapabilities ToyProblem::capabilities() const {
  OracleCapabilities c;
  c.has_exact_inner = true;
  c.has_exact_outer = true;
  c.has_y_star = true;
  c.has_phi = true;
  c.has_grad_phi = true;
  return c;
}

SampleToken ToyProblem::draw_inner_sample(Rng& rng) const {
  std::normal_distribution<double> nd(0.0, 1.0);
  SampleToken s;
  s.gauss.resize(2);
  s.gauss[0] = nd(rng);
  s.gauss[1] = nd(rng);
  return s;
}

SampleToken ToyProblem::draw_outer_sample(Rng& rng) const { return draw_inner_sample(rng); }

InnerEval ToyProblem::eval_inner(const Vec& x, const SampleToken& s) const {
  require_finite(x, "x");
  InnerEval e;
  e.value = Vec::Constant(1, 2.0 * x[0] + sigma_value_ * s.gauss[0]);
  e.jacobian = Mat::Constant(1, 1, 2.0 + sigma_jac_ * s.gauss[1]);
  return e;
}

OuterEval ToyProblem::eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const {
  require_finite(u, "u");
  require_finite(y, "y");
  OuterEval e;
  e.grad_g = Vec::Constant(1, -4.0 * u[0] + 2.0 * y[0] + sigma_grad_ * s.gauss[0]);
  e.grad_y = Vec::Constant(1, 2.0 * u[0] - y[0] + sigma_grad_ * s.gauss[1]);
  return e;
}

Vec ToyProblem::exact_g(const Vec& x) const { return Vec::Constant(1, 2.0 * x[0]); }
Mat ToyProblem::exact_jacobian(const Vec&) const { return Mat::Constant(1, 1, 2.0); }
Vec ToyProblem::exact_grad_g_f(const Vec& u, const Vec& y) const {
  return Vec::Constant(1, -4.0 * u[0] + 2.0 * y[0]);
}
Vec ToyProblem::exact_grad_y_f(const Vec& u, const Vec& y) const {
  return Vec::Constant(1, 2.0 * u[0] - y[0]);
}
double ToyProblem::exact_f(const Vec& u, const Vec& y) const {
  return -2.0 * u[0] * u[0] + 2.0 * u[0] * y[0] - 0.5 * y[0] * y[0];
}
Vec ToyProblem::y_star(const Vec& x) const { return Vec::Constant(1, 4.0 * x[0]); }
double ToyProblem::phi(const Vec&) const { return 0.0; }
Vec ToyProblem::grad_phi(const Vec&) const { return Vec::Zero(1); }

std::shared_ptr<CompositionalOracle> make_toy(double noise_value, double noise_jac,
                                              double noise_grad) {
  return std::make_shared<ToyProblem>(noise_value, noise_jac, noise_grad);
}

}  // namespace cmx
