#include "cmx/problems/portfolio.hpp"

#include <cmath>

#include "cmx/simplex.hpp"

namespace cmx {

PortfolioProblem::PortfolioProblem(Mat returns, double lambda_risk, double sqrt_floor,
                                   Index batch)
    : returns_(std::move(returns)), lambda_(lambda_risk), floor_(sqrt_floor), batch_(batch) {
  if (returns_.rows() < 2 || returns_.cols() < 2)
    throw ConfigError("PortfolioProblem: need at least 2 periods and 2 assets");
  if (lambda_ < 0) throw ConfigError("PortfolioProblem: lambda_risk must be nonnegative");
  if (!(floor_ > 0)) throw ConfigError("PortfolioProblem: sqrt_floor must be positive");
  if (batch_ < 1 || batch_ > returns_.rows())
    throw ConfigError("PortfolioProblem: batch must be in [1, T_data]");
}

Dims PortfolioProblem::dims() const { return {returns_.cols(), 2, returns_.cols()}; }

OracleCapabilities PortfolioProblem::capabilities() const {
  OracleCapabilities c;
  c.has_exact_inner = true;
  c.has_exact_outer = true;
  return c;
}

SampleToken PortfolioProblem::draw_inner_sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(returns_.rows()) - 1);
  SampleToken s;
  s.idx.resize(static_cast<std::size_t>(batch_));
  for (auto& i : s.idx) i = pick(rng);
  return s;
}

InnerEval PortfolioProblem::eval_inner(const Vec& x, const SampleToken& s) const {
  require_finite(x, "x");
  const Index d = returns_.cols();
  InnerEval e;
  e.value = Vec::Zero(2);
  e.jacobian = Mat::Zero(2, d);
  const double inv = 1.0 / static_cast<double>(s.idx.size());
  for (std::size_t i : s.idx) {
    const auto r = returns_.row(static_cast<Index>(i));
    const double payoff = r.dot(x);
    e.value[0] += payoff;
    e.value[1] += payoff * payoff;
    e.jacobian.row(0) += r;
    e.jacobian.row(1) += 2.0 * payoff * r;
  }
  e.value *= inv;
  e.jacobian *= inv;
  return e;
}

double PortfolioProblem::deviation(double u1, double u2, bool* active) const {
  const double var = u2 - u1 * u1;
  if (active) *active = var > floor_;
  return std::sqrt(std::max(var, floor_));
}

OuterEval PortfolioProblem::eval_outer(const Vec& u, const Vec& y, const SampleToken&) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const Index d = returns_.cols();
  const double periods = static_cast<double>(returns_.rows());
  const double inv_d = 1.0 / static_cast<double>(d);
  bool active = false;
  const double s = deviation(u[0], u[1], &active);
  const double y_mean = y.sum() * inv_d;

  OuterEval e;
  e.grad_g = Vec::Zero(2);
  e.grad_g[0] = y_mean * (-periods - (active ? lambda_ * u[0] / s : 0.0));
  e.grad_g[1] = y_mean * (active ? lambda_ / (2.0 * s) : 0.0);

  const double base = -periods * u[0] + lambda_ * s;
  e.grad_y = Vec(d);
  for (Index k = 0; k < d; ++k) {
    const double dev = y[k] - inv_d;
    e.grad_y[k] = inv_d * (base - dev * dev) - 2.0 * inv_d * y[k] * dev;
  }
  return e;
}

Vec PortfolioProblem::exact_g(const Vec& x) const {
  require_finite(x, "x");
  const Vec payoff = returns_ * x;
  Vec g(2);
  g[0] = payoff.mean();
  g[1] = payoff.array().square().mean();
  return g;
}

Mat PortfolioProblem::exact_jacobian(const Vec& x) const {
  const Vec payoff = returns_ * x;
  Mat j(2, returns_.cols());
  j.row(0) = returns_.colwise().mean();
  j.row(1) = 2.0 * (payoff.transpose() * returns_) / static_cast<double>(returns_.rows());
  return j;
}

Vec PortfolioProblem::exact_grad_g_f(const Vec& u, const Vec& y) const {
  return eval_outer(u, y, {}).grad_g;
}

Vec PortfolioProblem::exact_grad_y_f(const Vec& u, const Vec& y) const {
  return eval_outer(u, y, {}).grad_y;
}

double PortfolioProblem::exact_f(const Vec& u, const Vec& y) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const Index d = returns_.cols();
  const double periods = static_cast<double>(returns_.rows());
  const double inv_d = 1.0 / static_cast<double>(d);
  const double base = -periods * u[0] + lambda_ * deviation(u[0], u[1]);
  double f = 0.0;
  for (Index k = 0; k < d; ++k) {
    const double dev = y[k] - inv_d;
    f += y[k] * (base - dev * dev);
  }
  return f * inv_d;
}

Vec PortfolioProblem::project_y(const Vec& y) const { return simplex_project(y); }

std::shared_ptr<CompositionalOracle> make_portfolio(Mat returns, double lambda_risk,
                                                    double sqrt_floor, Index batch) {
  return std::make_shared<PortfolioProblem>(std::move(returns), lambda_risk, sqrt_floor, batch);
}

Mat synthetic_returns(Index periods, Index assets, std::uint64_t seed) {
  if (periods < 2 || assets < 2)
    throw ConfigError("synthetic_returns: need at least 2 periods and 2 assets");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> mean_dist(-0.02, 0.05);
  Vec means(assets);
  for (Index a = 0; a < assets; ++a) means[a] = mean_dist(rng);
  Mat r(periods, assets);
  for (Index t = 0; t < periods; ++t)
    for (Index a = 0; a < assets; ++a) r(t, a) = means[a] + 0.05 * nd(rng);
  return r;
}

}  // namespace cmx
