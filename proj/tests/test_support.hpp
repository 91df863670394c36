#pragma once

#include <cmath>
#include <memory>

#include "cmx/oracle.hpp"

namespace cmx::testsupport {

inline bool exactly_equal(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// Central finite differences of the exact maps against the published
// derivatives. Returns the worst relative error seen.
inline double fd_check_inner(const CompositionalOracle& o, const Vec& x, double h = 1e-5) {
  const Mat jac = o.exact_jacobian(x);
  double worst = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec col = (o.exact_g(xp) - o.exact_g(xm)) / (2.0 * h);
    const double err = (col - jac.col(j)).norm() / (1.0 + jac.col(j).norm());
    worst = std::max(worst, err);
  }
  return worst;
}

inline double fd_check_outer(const CompositionalOracle& o, const Vec& u, const Vec& y,
                             double h = 1e-5) {
  const Vec gg = o.exact_grad_g_f(u, y);
  const Vec gy = o.exact_grad_y_f(u, y);
  double worst = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    Vec up = u, um = u;
    up[j] += h;
    um[j] -= h;
    const double fd = (o.exact_f(up, y) - o.exact_f(um, y)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - gg[j]) / (1.0 + std::abs(gg[j])));
  }
  for (Index j = 0; j < y.size(); ++j) {
    Vec yp = y, ym = y;
    yp[j] += h;
    ym[j] -= h;
    const double fd = (o.exact_f(u, yp) - o.exact_f(u, ym)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - gy[j]) / (1.0 + std::abs(gy[j])));
  }
  return worst;
}

inline double fd_check_phi(const CompositionalOracle& o, const Vec& x, double h = 1e-5) {
  const Vec g = o.grad_phi(x);
  double worst = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double fd = (o.phi(xp) - o.phi(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[j]) / (1.0 + std::abs(g[j])));
  }
  return worst;
}

// Wrapper counting every token drawn, for sample-budget accounting checks.
class CountingOracle final : public CompositionalOracle {
 public:
  explicit CountingOracle(std::shared_ptr<CompositionalOracle> inner)
      : inner_(std::move(inner)) {}

  mutable long draws = 0;

  Dims dims() const override { return inner_->dims(); }
  OracleCapabilities capabilities() const override { return inner_->capabilities(); }
  SampleToken draw_inner_sample(Rng& rng) const override {
    ++draws;
    return inner_->draw_inner_sample(rng);
  }
  SampleToken draw_outer_sample(Rng& rng) const override {
    ++draws;
    return inner_->draw_outer_sample(rng);
  }
  InnerEval eval_inner(const Vec& x, const SampleToken& s) const override {
    return inner_->eval_inner(x, s);
  }
  OuterEval eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const override {
    return inner_->eval_outer(u, y, s);
  }
  Vec exact_g(const Vec& x) const override { return inner_->exact_g(x); }
  Mat exact_jacobian(const Vec& x) const override { return inner_->exact_jacobian(x); }
  Vec exact_grad_g_f(const Vec& u, const Vec& y) const override {
    return inner_->exact_grad_g_f(u, y);
  }
  Vec exact_grad_y_f(const Vec& u, const Vec& y) const override {
    return inner_->exact_grad_y_f(u, y);
  }
  double exact_f(const Vec& u, const Vec& y) const override { return inner_->exact_f(u, y); }
  Vec y_star(const Vec& x) const override { return inner_->y_star(x); }
  double phi(const Vec& x) const override { return inner_->phi(x); }
  Vec grad_phi(const Vec& x) const override { return inner_->grad_phi(x); }
  std::optional<double> phi_min() const override { return inner_->phi_min(); }
  Vec project_x(const Vec& x) const override { return inner_->project_x(x); }
  Vec project_y(const Vec& y) const override { return inner_->project_y(y); }

 private:
  std::shared_ptr<CompositionalOracle> inner_;
};

}  // namespace cmx::testsupport
