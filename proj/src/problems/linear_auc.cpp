#include "cmx/problems/linear_auc.hpp"

#include <cmath>
#include <numeric>

namespace cmx {

namespace {
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}  // namespace

LinearAucProblem::LinearAucProblem(AucDataset data, double alpha_inner, Index batch)
    : data_(std::move(data)), alpha_(alpha_inner), batch_(batch) {
  const Index n = data_.features.rows();
  if (n < 2) throw ConfigError("LinearAucProblem: need at least 2 examples");
  if (data_.labels.size() != n)
    throw ConfigError("LinearAucProblem: labels/features size mismatch");
  if (!(data_.imratio > 0.0) || !(data_.imratio < 1.0))
    throw ConfigError("LinearAucProblem: imratio must be in (0,1)");
  if (!(alpha_ > 0.0)) throw ConfigError("LinearAucProblem: alpha_inner must be positive");
  if (batch_ < 1 || batch_ > n) throw ConfigError("LinearAucProblem: batch must be in [1,n]");
  bool has_pos = false, has_neg = false;
  for (Index i = 0; i < n; ++i) {
    if (data_.labels[i] == 1) has_pos = true;
    else if (data_.labels[i] == -1) has_neg = true;
    else throw ConfigError("LinearAucProblem: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw ConfigError("LinearAucProblem: dataset must contain both classes");
  all_idx_.resize(static_cast<std::size_t>(n));
  std::iota(all_idx_.begin(), all_idx_.end(), std::size_t{0});
}

Dims LinearAucProblem::dims() const {
  const Index d = data_.features.cols();
  return {d + 2, d + 2, 1};
}

OracleCapabilities LinearAucProblem::capabilities() const {
  OracleCapabilities c;
  c.has_exact_inner = true;
  c.has_exact_outer = true;
  c.has_y_star = true;
  c.has_phi = true;
  return c;
}

SampleToken LinearAucProblem::draw_inner_sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(
      0, static_cast<std::size_t>(data_.features.rows()) - 1);
  SampleToken s;
  s.idx.resize(static_cast<std::size_t>(batch_));
  for (auto& i : s.idx) i = pick(rng);
  return s;
}

SampleToken LinearAucProblem::draw_outer_sample(Rng& rng) const { return draw_inner_sample(rng); }

Vec LinearAucProblem::logistic_grad(const Vec& x, const std::vector<std::size_t>& idx) const {
  Vec g = Vec::Zero(data_.features.cols());
  for (std::size_t i : idx) {
    const auto row = data_.features.row(static_cast<Index>(i));
    const double theta = static_cast<double>(data_.labels[static_cast<Index>(i)]);
    const double s = row.dot(x);
    g -= theta * sigmoid(-theta * s) * row.transpose();
  }
  return g / static_cast<double>(idx.size());
}

InnerEval LinearAucProblem::eval_inner(const Vec& xbar, const SampleToken& s) const {
  require_finite(xbar, "xbar");
  const Index d = data_.features.cols();
  InnerEval e;
  e.value = xbar;
  e.value.head(d) -= alpha_ * logistic_grad(xbar.head(d), s.idx);
  e.jacobian = Mat::Identity(d + 2, d + 2);
  return e;
}

void LinearAucProblem::outer_terms(const Vec& u, double y, Index i, double weight, Vec& grad_g,
                                   double& grad_y, double& value) const {
  const Index d = data_.features.cols();
  const double p = data_.imratio;
  const auto row = data_.features.row(i);
  const double s = row.dot(u.head(d));
  const double a = u[d], b = u[d + 1];
  const bool pos = data_.labels[i] == 1;
  double g1, g2, dg_ds;
  if (pos) {
    g1 = (1.0 - p) * (s - a) * (s - a) + 2.0 * p * s;
    g2 = -2.0 * (1.0 - p) * s;
    dg_ds = 2.0 * (1.0 - p) * (s - a) + 2.0 * p - 2.0 * y * (1.0 - p);
    grad_g[d] += weight * (-2.0 * (1.0 - p) * (s - a));
  } else {
    g1 = p * (s - b) * (s - b) - 2.0 * (1.0 - p) * s;
    g2 = 2.0 * p * s;
    dg_ds = 2.0 * p * (s - b) - 2.0 * (1.0 - p) + 2.0 * y * p;
    grad_g[d + 1] += weight * (-2.0 * p * (s - b));
  }
  grad_g.head(d) += weight * dg_ds * row.transpose();
  grad_y += weight * g2;
  value += weight * (g1 + y * g2);
}

OuterEval LinearAucProblem::eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const double p = data_.imratio;
  OuterEval e;
  e.grad_g = Vec::Zero(u.size());
  double gy = 0.0, value = 0.0;
  const double weight = 1.0 / static_cast<double>(s.idx.size());
  for (std::size_t i : s.idx)
    outer_terms(u, y[0], static_cast<Index>(i), weight, e.grad_g, gy, value);
  e.grad_y = Vec::Constant(1, gy - 2.0 * p * (1.0 - p) * y[0]);
  return e;
}

Vec LinearAucProblem::exact_g(const Vec& xbar) const {
  require_finite(xbar, "xbar");
  const Index d = data_.features.cols();
  Vec g = xbar;
  g.head(d) -= alpha_ * logistic_grad(xbar.head(d), all_idx_);
  return g;
}

Mat LinearAucProblem::exact_jacobian(const Vec& xbar) const {
  const Index d = data_.features.cols();
  const Index n = data_.features.rows();
  Mat hess = Mat::Zero(d, d);
  for (Index i = 0; i < n; ++i) {
    const auto row = data_.features.row(i);
    const double sg = sigmoid(row.dot(xbar.head(d)));
    hess += sg * (1.0 - sg) * row.transpose() * row;
  }
  hess /= static_cast<double>(n);
  Mat j = Mat::Identity(d + 2, d + 2);
  j.topLeftCorner(d, d) -= alpha_ * hess;
  return j;
}

Vec LinearAucProblem::exact_grad_g_f(const Vec& u, const Vec& y) const {
  const Index n = data_.features.rows();
  Vec grad_g = Vec::Zero(u.size());
  double gy = 0.0, value = 0.0;
  const double weight = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) outer_terms(u, y[0], i, weight, grad_g, gy, value);
  return grad_g;
}

Vec LinearAucProblem::exact_grad_y_f(const Vec& u, const Vec& y) const {
  const Index n = data_.features.rows();
  Vec grad_g = Vec::Zero(u.size());
  double gy = 0.0, value = 0.0;
  const double weight = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) outer_terms(u, y[0], i, weight, grad_g, gy, value);
  return Vec::Constant(1, gy - 2.0 * data_.imratio * (1.0 - data_.imratio) * y[0]);
}

double LinearAucProblem::exact_f(const Vec& u, const Vec& y) const {
  const Index n = data_.features.rows();
  Vec grad_g = Vec::Zero(u.size());
  double gy = 0.0, value = 0.0;
  const double weight = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) outer_terms(u, y[0], i, weight, grad_g, gy, value);
  const double p = data_.imratio;
  return value - p * (1.0 - p) * y[0] * y[0];
}

Vec LinearAucProblem::y_star(const Vec& xbar) const {
  const Vec u = exact_g(xbar);
  const Index n = data_.features.rows();
  Vec grad_g = Vec::Zero(u.size());
  double gy = 0.0, value = 0.0;
  const double weight = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) outer_terms(u, 0.0, i, weight, grad_g, gy, value);
  const double p = data_.imratio;
  return Vec::Constant(1, gy / (2.0 * p * (1.0 - p)));
}

double LinearAucProblem::phi(const Vec& xbar) const {
  return exact_f(exact_g(xbar), y_star(xbar));
}

std::shared_ptr<CompositionalOracle> make_linear_auc(AucDataset data, double alpha_inner,
                                                     Index batch) {
  return std::make_shared<LinearAucProblem>(std::move(data), alpha_inner, batch);
}

AucDataset make_imbalanced_gaussian(Index n, Index d, double imratio, std::uint64_t seed) {
  if (n < 2 || d < 1) throw ConfigError("make_imbalanced_gaussian: need n >= 2, d >= 1");
  if (!(imratio > 0.0) || !(imratio < 1.0))
    throw ConfigError("make_imbalanced_gaussian: imratio must be in (0,1)");
  const Index n_pos = std::max<Index>(1, static_cast<Index>(std::lround(imratio * double(n))));
  if (n_pos >= n) throw ConfigError("make_imbalanced_gaussian: imratio leaves no negatives");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double shift = 0.5 / std::sqrt(double(d));
  AucDataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const bool pos = i < n_pos;
    ds.labels[i] = pos ? 1 : -1;
    for (Index j = 0; j < d; ++j) ds.features(i, j) = nd(rng) + (pos ? shift : -shift);
  }
  ds.imratio = imratio;
  return ds;
}

}  // namespace cmx
