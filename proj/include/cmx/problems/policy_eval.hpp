#pragma once

#include <memory>

#include "cmx/oracle.hpp"

namespace cmx {

// Distributionally robust linear policy evaluation on a generated MDP.
// Inner map g(x) in R^{S+L}: the first S coordinates are sampled TD
// residuals delta_s(x) = z_s'x - (R_{s,s'} + r z_{s'}'x) with one next
// state s' ~ P_{s,.} per state per token; the last L coordinates pass x
// through exactly. Outer:
//   f(u, y) = (1/S) sum_s y_s u_s^2 + beta sum_l u_{S+l}^2/(1+u_{S+l}^2)
//             - ||y - 1/S||^2
// with y on the S-simplex.
class PolicyEvalProblem final : public CompositionalOracle {
 public:
  PolicyEvalProblem(Mat transitions, Mat rewards, Mat features, double discount,
                    double beta_reg);

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
  Vec y_star(const Vec& x) const override;
  double phi(const Vec& x) const override;

  Vec project_y(const Vec& y) const override;

  const Mat& transitions() const { return P_; }

 private:
  Mat P_;        // S x S, row-stochastic
  Mat R_;        // S x S
  Mat z_;        // S x L
  double discount_;
  double beta_;
  Mat cum_;      // row-wise cumulative P for categorical sampling
  Vec exp_reward_;       // per-state E[R_{s,s'}]
  Mat exp_next_feat_;    // per-state E[z_{s'}], S x L
};

// Transition probabilities uniform on [0,1] plus 1e-5 for ergodicity, rows
// normalized; rewards uniform on [0,1].
void generate_mdp(Index states, std::uint64_t seed, Mat& transitions, Mat& rewards);

std::shared_ptr<CompositionalOracle> make_policy_eval(Mat transitions, Mat rewards,
                                                      Mat features, double discount,
                                                      double beta_reg);

// Generated instance: MDP from (states, seed) and Gaussian features from the
// same seed stream.
std::shared_ptr<CompositionalOracle> make_policy_eval(Index states, Index feature_dim,
                                                      std::uint64_t seed, double discount,
                                                      double beta_reg);

}  // namespace cmx
