#include "cmx/problems/linquad.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace cmx {

LinQuadProblem::LinQuadProblem(LinQuadSpec spec) : spec_(std::move(spec)) {
  const Index dx = spec_.A.cols(), dg = spec_.A.rows(), dy = spec_.Q.cols();
  if (dx < 1 || dg < 1 || dy < 1) throw ConfigError("LinQuadProblem: empty dimensions");
  if (spec_.b.size() != dg || spec_.P.rows() != dg || spec_.P.cols() != dg ||
      spec_.Q.rows() != dg || spec_.c.size() != dg)
    throw ConfigError("LinQuadProblem: inconsistent dimensions");
  if (!(spec_.mu > 0)) throw ConfigError("LinQuadProblem: mu must be positive");
  if (!spec_.P.isApprox(spec_.P.transpose(), 1e-10))
    throw ConfigError("LinQuadProblem: P must be symmetric");

  H_ = spec_.P + spec_.Q * spec_.Q.transpose() / spec_.mu;
  Eigen::SelfAdjointEigenSolver<Mat> es(H_);
  if (es.eigenvalues().minCoeff() <= 0)
    throw ConfigError("LinQuadProblem: P + QQ'/mu must be positive definite");

  // Unique minimizer of the quadratic Phi.
  const Mat lhs = spec_.A.transpose() * H_ * spec_.A;
  const Vec rhs = -spec_.A.transpose() * (H_ * spec_.b + spec_.c);
  Eigen::LDLT<Mat> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw ConfigError("LinQuadProblem: A'HA is singular; Phi has no unique minimizer");
  x_star_ = ldlt.solve(rhs);
  phi_star_ = phi(x_star_);

  gauss_len_ = std::max(dg + dg * dx, dg + dy);
}

Dims LinQuadProblem::dims() const {
  return {spec_.A.cols(), spec_.A.rows(), spec_.Q.cols()};
}

OracleCapabilities LinQuadProblem::capabilities() const {
  OracleCapabilities c;
  c.has_exact_inner = true;
  c.has_exact_outer = true;
  c.has_y_star = true;
  c.has_phi = true;
  c.has_grad_phi = true;
  return c;
}

SampleToken LinQuadProblem::draw_inner_sample(Rng& rng) const {
  std::normal_distribution<double> nd(0.0, 1.0);
  SampleToken s;
  s.gauss.resize(gauss_len_);
  for (Index i = 0; i < gauss_len_; ++i) s.gauss[i] = nd(rng);
  return s;
}

SampleToken LinQuadProblem::draw_outer_sample(Rng& rng) const { return draw_inner_sample(rng); }

InnerEval LinQuadProblem::eval_inner(const Vec& x, const SampleToken& s) const {
  require_finite(x, "x");
  const Index dx = spec_.A.cols(), dg = spec_.A.rows();
  InnerEval e;
  e.value = spec_.A * x + spec_.b;
  e.jacobian = spec_.A;
  if (spec_.noise_value > 0)
    e.value += spec_.noise_value * s.gauss.head(dg);
  if (spec_.noise_jac > 0)
    e.jacobian += spec_.noise_jac *
                  Eigen::Map<const Mat>(s.gauss.data() + dg, dg, dx);
  return e;
}

OuterEval LinQuadProblem::eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const Index dg = spec_.A.rows(), dy = spec_.Q.cols();
  OuterEval e;
  e.grad_g = spec_.P * u + spec_.Q * y + spec_.c;
  e.grad_y = spec_.Q.transpose() * u - spec_.mu * y;
  if (spec_.noise_grad > 0) {
    e.grad_g += spec_.noise_grad * s.gauss.head(dg);
    e.grad_y += spec_.noise_grad * s.gauss.segment(dg, dy);
  }
  return e;
}

Vec LinQuadProblem::exact_g(const Vec& x) const { return spec_.A * x + spec_.b; }
Mat LinQuadProblem::exact_jacobian(const Vec&) const { return spec_.A; }
Vec LinQuadProblem::exact_grad_g_f(const Vec& u, const Vec& y) const {
  return spec_.P * u + spec_.Q * y + spec_.c;
}
Vec LinQuadProblem::exact_grad_y_f(const Vec& u, const Vec& y) const {
  return spec_.Q.transpose() * u - spec_.mu * y;
}
double LinQuadProblem::exact_f(const Vec& u, const Vec& y) const {
  return 0.5 * u.dot(spec_.P * u) + u.dot(spec_.Q * y) - 0.5 * spec_.mu * y.squaredNorm() +
         spec_.c.dot(u);
}
Vec LinQuadProblem::y_star(const Vec& x) const {
  return spec_.Q.transpose() * exact_g(x) / spec_.mu;
}
double LinQuadProblem::phi(const Vec& x) const {
  const Vec u = exact_g(x);
  return 0.5 * u.dot(H_ * u) + spec_.c.dot(u);
}
Vec LinQuadProblem::grad_phi(const Vec& x) const {
  const Vec u = exact_g(x);
  return spec_.A.transpose() * (H_ * u + spec_.c);
}

std::shared_ptr<CompositionalOracle> make_linquad(LinQuadSpec spec) {
  return std::make_shared<LinQuadProblem>(std::move(spec));
}

std::shared_ptr<CompositionalOracle> make_linquad(Index dx, Index dg, Index dy,
                                                  std::uint64_t seed, double noise_value,
                                                  double noise_jac, double noise_grad) {
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  LinQuadSpec s;
  s.A.resize(dg, dx);
  for (Index i = 0; i < dg; ++i)
    for (Index j = 0; j < dx; ++j) s.A(i, j) = nd(rng) / std::sqrt(double(dx));
  s.b.resize(dg);
  for (Index i = 0; i < dg; ++i) s.b[i] = 0.1 * nd(rng);
  s.P = Mat::Identity(dg, dg);
  s.Q.resize(dg, dy);
  for (Index i = 0; i < dg; ++i)
    for (Index j = 0; j < dy; ++j) s.Q(i, j) = 0.5 * nd(rng) / std::sqrt(double(dy));
  s.c.resize(dg);
  for (Index i = 0; i < dg; ++i) s.c[i] = 0.1 * nd(rng);
  s.mu = 1.0;
  s.noise_value = noise_value;
  s.noise_jac = noise_jac;
  s.noise_grad = noise_grad;
  return make_linquad(std::move(s));
}

}  // namespace cmx
