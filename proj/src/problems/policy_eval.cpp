#include "cmx/problems/policy_eval.hpp"

#include <algorithm>
#include <cmath>

#include "cmx/simplex.hpp"

namespace cmx {

PolicyEvalProblem::PolicyEvalProblem(Mat transitions, Mat rewards, Mat features,
                                     double discount, double beta_reg)
    : P_(std::move(transitions)),
      R_(std::move(rewards)),
      z_(std::move(features)),
      discount_(discount),
      beta_(beta_reg) {
  const Index s_count = P_.rows();
  if (s_count < 2 || P_.cols() != s_count)
    throw ConfigError("PolicyEvalProblem: transitions must be square with S >= 2");
  if (R_.rows() != s_count || R_.cols() != s_count)
    throw ConfigError("PolicyEvalProblem: rewards dimension mismatch");
  if (z_.rows() != s_count || z_.cols() < 1)
    throw ConfigError("PolicyEvalProblem: features dimension mismatch");
  if (!(discount_ >= 0.0) || discount_ >= 1.0)
    throw ConfigError("PolicyEvalProblem: discount must be in [0,1)");
  if (beta_ < 0.0) throw ConfigError("PolicyEvalProblem: beta_reg must be nonnegative");
  for (Index s = 0; s < s_count; ++s) {
    if (std::abs(P_.row(s).sum() - 1.0) > 1e-12)
      throw ConfigError("PolicyEvalProblem: transition rows must sum to 1");
    if (P_.row(s).minCoeff() <= 0.0)
      throw ConfigError("PolicyEvalProblem: transition entries must be positive");
  }

  cum_.resize(s_count, s_count);
  for (Index s = 0; s < s_count; ++s) {
    double acc = 0.0;
    for (Index t = 0; t < s_count; ++t) {
      acc += P_(s, t);
      cum_(s, t) = acc;
    }
    cum_(s, s_count - 1) = 1.0;
  }
  exp_reward_ = (P_.array() * R_.array()).rowwise().sum();
  exp_next_feat_ = P_ * z_;
}

Dims PolicyEvalProblem::dims() const { return {z_.cols(), P_.rows() + z_.cols(), P_.rows()}; }

OracleCapabilities PolicyEvalProblem::capabilities() const {
  OracleCapabilities c;
  c.has_exact_inner = true;
  c.has_exact_outer = true;
  c.has_y_star = true;
  c.has_phi = true;
  return c;
}

SampleToken PolicyEvalProblem::draw_inner_sample(Rng& rng) const {
  const Index s_count = P_.rows();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleToken tok;
  tok.idx.resize(static_cast<std::size_t>(s_count));
  for (Index s = 0; s < s_count; ++s) {
    const double r = unif(rng);
    const double* row = cum_.data() + s;  // column-major: stride over columns
    // binary search on the cumulative row
    Index lo = 0, hi = s_count - 1;
    while (lo < hi) {
      const Index mid = (lo + hi) / 2;
      if (row[mid * s_count] < r)
        lo = mid + 1;
      else
        hi = mid;
    }
    tok.idx[static_cast<std::size_t>(s)] = static_cast<std::size_t>(lo);
  }
  return tok;
}

InnerEval PolicyEvalProblem::eval_inner(const Vec& x, const SampleToken& tok) const {
  require_finite(x, "x");
  const Index s_count = P_.rows(), l = z_.cols();
  InnerEval e;
  e.value.resize(s_count + l);
  e.jacobian = Mat::Zero(s_count + l, l);
  for (Index s = 0; s < s_count; ++s) {
    const Index nxt = static_cast<Index>(tok.idx[static_cast<std::size_t>(s)]);
    e.value[s] = z_.row(s).dot(x) - (R_(s, nxt) + discount_ * z_.row(nxt).dot(x));
    e.jacobian.row(s) = z_.row(s) - discount_ * z_.row(nxt);
  }
  e.value.tail(l) = x;
  e.jacobian.bottomRows(l) = Mat::Identity(l, l);
  return e;
}

OuterEval PolicyEvalProblem::eval_outer(const Vec& u, const Vec& y, const SampleToken&) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const Index s_count = P_.rows(), l = z_.cols();
  const double inv_s = 1.0 / static_cast<double>(s_count);
  OuterEval e;
  e.grad_g.resize(s_count + l);
  e.grad_g.head(s_count) = 2.0 * inv_s * y.cwiseProduct(u.head(s_count));
  for (Index k = 0; k < l; ++k) {
    const double v = u[s_count + k];
    const double denom = 1.0 + v * v;
    e.grad_g[s_count + k] = beta_ * 2.0 * v / (denom * denom);
  }
  e.grad_y = inv_s * u.head(s_count).array().square().matrix() -
             2.0 * (y.array() - inv_s).matrix();
  return e;
}

Vec PolicyEvalProblem::exact_g(const Vec& x) const {
  require_finite(x, "x");
  const Index s_count = P_.rows(), l = z_.cols();
  Vec g(s_count + l);
  g.head(s_count) = z_ * x - exp_reward_ - discount_ * (exp_next_feat_ * x);
  g.tail(l) = x;
  return g;
}

Mat PolicyEvalProblem::exact_jacobian(const Vec&) const {
  const Index s_count = P_.rows(), l = z_.cols();
  Mat j(s_count + l, l);
  j.topRows(s_count) = z_ - discount_ * exp_next_feat_;
  j.bottomRows(l) = Mat::Identity(l, l);
  return j;
}

Vec PolicyEvalProblem::exact_grad_g_f(const Vec& u, const Vec& y) const {
  return eval_outer(u, y, {}).grad_g;
}

Vec PolicyEvalProblem::exact_grad_y_f(const Vec& u, const Vec& y) const {
  return eval_outer(u, y, {}).grad_y;
}

double PolicyEvalProblem::exact_f(const Vec& u, const Vec& y) const {
  require_finite(u, "u");
  require_finite(y, "y");
  const Index s_count = P_.rows(), l = z_.cols();
  const double inv_s = 1.0 / static_cast<double>(s_count);
  double f = inv_s * y.dot(u.head(s_count).array().square().matrix());
  for (Index k = 0; k < l; ++k) {
    const double v = u[s_count + k];
    f += beta_ * v * v / (1.0 + v * v);
  }
  f -= (y.array() - inv_s).square().sum();
  return f;
}

Vec PolicyEvalProblem::y_star(const Vec& x) const {
  const Index s_count = P_.rows();
  const double inv_s = 1.0 / static_cast<double>(s_count);
  const Vec u = exact_g(x);
  // f is -||y - c||^2 + const in y with c = 1/S + u_s^2/(2S), so the
  // constrained maximizer is the simplex projection of c.
  const Vec c = (inv_s + (0.5 * inv_s) * u.head(s_count).array().square()).matrix();
  return simplex_project(c);
}

double PolicyEvalProblem::phi(const Vec& x) const { return exact_f(exact_g(x), y_star(x)); }

Vec PolicyEvalProblem::project_y(const Vec& y) const { return simplex_project(y); }

void generate_mdp(Index states, std::uint64_t seed, Mat& transitions, Mat& rewards) {
  if (states < 2) throw ConfigError("generate_mdp: need at least 2 states");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  transitions.resize(states, states);
  rewards.resize(states, states);
  for (Index s = 0; s < states; ++s)
    for (Index t = 0; t < states; ++t) transitions(s, t) = unif(rng) + 1e-5;
  for (Index s = 0; s < states; ++s) transitions.row(s) /= transitions.row(s).sum();
  for (Index s = 0; s < states; ++s)
    for (Index t = 0; t < states; ++t) rewards(s, t) = unif(rng);
}

std::shared_ptr<CompositionalOracle> make_policy_eval(Mat transitions, Mat rewards,
                                                      Mat features, double discount,
                                                      double beta_reg) {
  return std::make_shared<PolicyEvalProblem>(std::move(transitions), std::move(rewards),
                                             std::move(features), discount, beta_reg);
}

std::shared_ptr<CompositionalOracle> make_policy_eval(Index states, Index feature_dim,
                                                      std::uint64_t seed, double discount,
                                                      double beta_reg) {
  Mat p, r;
  generate_mdp(states, seed, p, r);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat z(states, feature_dim);
  for (Index s = 0; s < states; ++s)
    for (Index k = 0; k < feature_dim; ++k) z(s, k) = nd(rng);
  return make_policy_eval(std::move(p), std::move(r), std::move(z), discount, beta_reg);
}

}  // namespace cmx
