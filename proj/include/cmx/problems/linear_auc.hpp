#pragma once

#include <memory>

#include "cmx/oracle.hpp"

namespace cmx {

struct AucDataset {
  Mat features;           // n x d
  Eigen::VectorXi labels; // entries +1 / -1
  double imratio = 0.5;
};

// AUC surrogate minimax with a linear scorer. Variables are xbar = (x; a; b)
// and a scalar dual y. The inner map performs one gradient step on the
// average logistic loss, g(xbar) = (x - alpha grad L(x), a, b); its sampled
// Jacobian is taken as the identity (the second-order term is dropped), while
// the exact Jacobian keeps the logistic Hessian for derivative checks.
class LinearAucProblem final : public CompositionalOracle {
 public:
  LinearAucProblem(AucDataset data, double alpha_inner, Index batch = 16);

  Dims dims() const override;
  OracleCapabilities capabilities() const override;

  SampleToken draw_inner_sample(Rng& rng) const override;
  SampleToken draw_outer_sample(Rng& rng) const override;
  InnerEval eval_inner(const Vec& xbar, const SampleToken& s) const override;
  OuterEval eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const override;

  Vec exact_g(const Vec& xbar) const override;
  Mat exact_jacobian(const Vec& xbar) const override;
  Vec exact_grad_g_f(const Vec& u, const Vec& y) const override;
  Vec exact_grad_y_f(const Vec& u, const Vec& y) const override;
  double exact_f(const Vec& u, const Vec& y) const override;
  Vec y_star(const Vec& xbar) const override;
  double phi(const Vec& xbar) const override;

 private:
  Vec logistic_grad(const Vec& x, const std::vector<std::size_t>& idx) const;
  // accumulates grad_g/grad_y contributions of one example; weight = 1/batch
  void outer_terms(const Vec& u, double y, Index i, double weight, Vec& grad_g,
                   double& grad_y, double& value) const;

  AucDataset data_;
  double alpha_;
  Index batch_;
  std::vector<std::size_t> all_idx_;
};

std::shared_ptr<CompositionalOracle> make_linear_auc(AucDataset data, double alpha_inner,
                                                     Index batch = 16);

// Two-Gaussian binary dataset with the requested positive-class fraction.
AucDataset make_imbalanced_gaussian(Index n, Index d, double imratio, std::uint64_t seed);

}  // namespace cmx
