#pragma once

#include <memory>

#include "cmx/oracle.hpp"

namespace cmx {

// Mean-deviation risk-averse portfolio selection as a compositional minimax
// problem. The inner map carries the first two moments of the portfolio
// payoff, g(x) = E[(<r,x>, <r,x>^2)], so the deviation is sqrt(u2 - u1^2);
// an epsilon floor inside the square root guards the zero-deviation point.
// The outer dual y lives on the D-simplex.
class PortfolioProblem final : public CompositionalOracle {
 public:
  PortfolioProblem(Mat returns, double lambda_risk, double sqrt_floor = 1e-12,
                   Index batch = 1);

  Dims dims() const override;
  OracleCapabilities capabilities() const override;

  SampleToken draw_inner_sample(Rng& rng) const override;
  SampleToken draw_outer_sample(Rng&) const override { return {}; }
  InnerEval eval_inner(const Vec& x, const SampleToken& s) const override;
  OuterEval eval_outer(const Vec& u, const Vec& y, const SampleToken& s) const override;

  Vec exact_g(const Vec& x) const override;
  Mat exact_jacobian(const Vec& x) const override;
  Vec exact_grad_g_f(const Vec& u, const Vec& y) const override;
  Vec exact_grad_y_f(const Vec& u, const Vec& y) const override;
  double exact_f(const Vec& u, const Vec& y) const override;

  Vec project_y(const Vec& y) const override;

 private:
  double deviation(double u1, double u2, bool* active = nullptr) const;

  Mat returns_;       // T_data x D
  double lambda_;
  double floor_;
  Index batch_;
};

std::shared_ptr<CompositionalOracle> make_portfolio(Mat returns, double lambda_risk,
                                                    double sqrt_floor = 1e-12,
                                                    Index batch = 1);

// Synthetic per-period returns with mildly heterogeneous asset means.
Mat synthetic_returns(Index periods, Index assets, std::uint64_t seed);

}  // namespace cmx
