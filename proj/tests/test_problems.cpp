#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cmx/data.hpp"
#include "cmx/problems/linear_auc.hpp"
#include "cmx/problems/linquad.hpp"
#include "cmx/problems/policy_eval.hpp"
#include "cmx/problems/portfolio.hpp"
#include "cmx/problems/toy.hpp"
#include "cmx/simplex.hpp"
#include "test_support.hpp"

using namespace cmx;
using namespace cmx::testsupport;

namespace {

Vec random_vec(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content = "")
      : path("/tmp/cmx_test_" + name) {
    if (!content.empty()) {
      std::ofstream out(path);
      out << content;
    }
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("toy closed forms") {
  auto o = make_toy();
  const Vec x = Vec::Constant(1, 1.0);
  CHECK(o->exact_g(x)[0] == 2.0);
  CHECK(o->y_star(x)[0] == 4.0);
  CHECK(o->phi(x) == 0.0);
  CHECK(o->grad_phi(x)[0] == 0.0);
  CHECK(o->phi_min() == 0.0);
  // f(g, y*) at any x equals Phi = 0
  CHECK(o->exact_f(o->exact_g(x), o->y_star(x)) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("toy noise enters through the recorded token") {
  auto o = make_toy(1.0, 0.0, 0.0);
  Rng rng(6);
  const Vec x = Vec::Constant(1, 1.0);
  const SampleToken tok = o->draw_inner_sample(rng);
  const InnerEval e = o->eval_inner(x, tok);
  CHECK(e.value[0] == doctest::Approx(2.0 + tok.gauss[0]).epsilon(1e-14));
  CHECK(e.jacobian(0, 0) == 2.0);  // jacobian noise scale is zero
}

TEST_CASE("linquad identity instance decouples") {
  LinQuadSpec spec;
  spec.A = Mat::Identity(3, 3);
  spec.b = Vec::Zero(3);
  spec.P = Mat::Identity(3, 3);
  spec.Q = Mat::Zero(3, 2);
  spec.c = Vec::Zero(3);
  auto o = make_linquad(spec);
  Rng rng(1);
  const Vec x = random_vec(3, rng);
  CHECK((o->grad_phi(x) - x).norm() <= 1e-14);
  CHECK(o->phi(x) == doctest::Approx(0.5 * x.squaredNorm()).epsilon(1e-14));
  CHECK(*o->phi_min() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("linquad construction rejects an indefinite effective hessian") {
  LinQuadSpec spec;
  spec.A = Mat::Identity(2, 2);
  spec.b = Vec::Zero(2);
  spec.P = -Mat::Identity(2, 2);  // H = -I, not positive definite
  spec.Q = Mat::Zero(2, 2);
  spec.c = Vec::Zero(2);
  CHECK_THROWS_AS(make_linquad(spec), ConfigError);
}

TEST_CASE("linquad generation is reproducible from the seed") {
  auto a = make_linquad(4, 5, 3, 42, 0.1, 0.1, 0.1);
  auto b = make_linquad(4, 5, 3, 42, 0.1, 0.1, 0.1);
  Rng rng(2);
  const Vec x = random_vec(4, rng);
  CHECK(exactly_equal(a->exact_g(x), b->exact_g(x)));
  CHECK(exactly_equal(a->grad_phi(x), b->grad_phi(x)));
}

TEST_CASE("linquad dual maximizer and primal gradient lipschitz bounds") {
  auto o = make_linquad(4, 5, 3, 17);
  const auto& lq = *dynamic_cast<const LinQuadProblem*>(o.get());
  const double na = lq.spec().A.jacobiSvd().singularValues()(0);
  const double nq = lq.spec().Q.jacobiSvd().singularValues()(0);
  const Mat H = lq.spec().P + lq.spec().Q * lq.spec().Q.transpose() / lq.spec().mu;
  const Mat smooth = lq.spec().A.transpose() * H * lq.spec().A;
  const double l_phi = smooth.jacobiSvd().singularValues()(0);
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Vec x1 = random_vec(4, rng, 2.0);
    const Vec x2 = random_vec(4, rng, 2.0);
    const double dist = (x1 - x2).norm();
    REQUIRE((o->y_star(x1) - o->y_star(x2)).norm() <=
            (na * nq / lq.spec().mu) * dist + 1e-12);
    REQUIRE((o->grad_phi(x1) - o->grad_phi(x2)).norm() <= l_phi * dist + 1e-10);
  }
}

TEST_CASE("finite differences validate every problem's exact derivatives") {
  std::vector<std::shared_ptr<CompositionalOracle>> problems = {
      make_toy(),
      make_linquad(4, 5, 3, 31),
      make_portfolio(synthetic_returns(40, 5, 1), 1.0),
      make_policy_eval(6, 4, 2, 0.9, 0.5),
      make_linear_auc(make_imbalanced_gaussian(60, 5, 0.25, 3), 0.1, 8),
  };
  Rng rng(10);
  for (const auto& o : problems) {
    const Dims d = o->dims();
    for (int k = 0; k < 10; ++k) {
      const Vec x = random_vec(d.dx, rng, 0.5);
      const Vec u = o->exact_g(x);
      Vec y = random_vec(d.dy, rng, 0.5);
      y = o->project_y(y);
      CHECK(fd_check_inner(*o, x) <= 1e-5);
      CHECK(fd_check_outer(*o, u, y) <= 1e-5);
    }
  }
}

TEST_CASE("portfolio frozen objective for constant returns") {
  Mat returns(2, 2);
  returns << 1, 0, 1, 0;
  auto o = make_portfolio(returns, 0.0);
  Vec x(2), y(2);
  x << 1, 0;
  y << 0.5, 0.5;
  // each summand is y_d * (-T_data * u1) = 0.5 * (-2); mean over D = 2 gives -1
  CHECK(o->exact_f(o->exact_g(x), y) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("portfolio zero holding") {
  Mat returns = synthetic_returns(30, 4, 5);
  auto o = make_portfolio(returns, 2.0);
  const Vec x = Vec::Zero(4);
  const Vec g = o->exact_g(x);
  CHECK(g.norm() == 0.0);
  Rng rng(1);
  Vec y = simplex_project(random_vec(4, rng));
  // zero mean and second moment leave only the floored deviation term
  const double base = 2.0 * std::sqrt(1e-12);
  double expect = 0.0;
  for (Index k = 0; k < 4; ++k) {
    const double dev = y[k] - 0.25;
    expect += y[k] * (base - dev * dev);
  }
  expect /= 4.0;
  CHECK(o->exact_f(g, y) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("portfolio full batch reproduces the exact inner map") {
  Mat returns = synthetic_returns(12, 3, 9);
  auto o = make_portfolio(returns, 1.0, 1e-12, 12);
  Rng rng(4);
  const Vec x = random_vec(3, rng);
  // force the full-batch token to enumerate each period once
  SampleToken tok;
  for (std::size_t i = 0; i < 12; ++i) tok.idx.push_back(i);
  const InnerEval e = o->eval_inner(x, tok);
  CHECK((e.value - o->exact_g(x)).norm() <= 1e-12);
  CHECK((e.jacobian - o->exact_jacobian(x)).norm() <= 1e-12);
}

TEST_CASE("portfolio objective is invariant under asset permutation") {
  Mat returns = synthetic_returns(25, 4, 7);
  auto o = make_portfolio(returns, 1.5);
  Mat perm_returns(25, 4);
  const int perm[4] = {2, 0, 3, 1};
  for (int j = 0; j < 4; ++j) perm_returns.col(j) = returns.col(perm[j]);
  auto op = make_portfolio(perm_returns, 1.5);
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_vec(4, rng);
    Vec y = simplex_project(random_vec(4, rng));
    Vec xp(4), yp(4);
    for (int j = 0; j < 4; ++j) {
      xp[j] = x[perm[j]];
      yp[j] = y[perm[j]];
    }
    REQUIRE(o->exact_f(o->exact_g(x), y) ==
            doctest::Approx(op->exact_f(op->exact_g(xp), yp)).epsilon(1e-12));
  }
}

TEST_CASE("generated mdp rows are stochastic and bounded away from zero") {
  Mat p, r;
  generate_mdp(20, 123, p, r);
  for (Index s = 0; s < 20; ++s) {
    CHECK(std::abs(p.row(s).sum() - 1.0) <= 1e-12);
    CHECK(p.row(s).minCoeff() >= 1e-5 / (1.0 + 20 * 1e-5));
  }
  CHECK(r.minCoeff() >= 0.0);
  CHECK(r.maxCoeff() <= 1.0);
  Mat p2, r2;
  generate_mdp(20, 123, p2, r2);
  CHECK(exactly_equal(p, p2));
  CHECK(exactly_equal(r, r2));
}

TEST_CASE("policy evaluation degenerate cases") {
  const Index s_count = 5, l = 3;
  Mat p = Mat::Constant(s_count, s_count, 1.0 / s_count);
  Mat r = Mat::Zero(s_count, s_count);
  Rng rng(2);
  Mat z(s_count, l);
  for (Index i = 0; i < s_count; ++i) z.row(i) = random_vec(l, rng).transpose();
  auto o = make_policy_eval(p, r, z, 0.0, 0.0);  // discount 0, rewards 0

  const Vec x = random_vec(l, rng);
  const Vec g = o->exact_g(x);
  for (Index s = 0; s < s_count; ++s)
    CHECK(g[s] == doctest::Approx(z.row(s).dot(x)).epsilon(1e-14));
  // sampled residuals carry no transition dependence here
  Rng rng2(3);
  const InnerEval e = o->eval_inner(x, o->draw_inner_sample(rng2));
  CHECK((e.value - g).norm() <= 1e-12);

  // x = 0: f(g(0), y) = -||y - 1/S||^2, maximized at the uniform vector
  const Vec zero = Vec::Zero(l);
  const Vec uniform = Vec::Constant(s_count, 1.0 / s_count);
  CHECK(o->exact_f(o->exact_g(zero), uniform) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((o->y_star(zero) - uniform).norm() <= 1e-12);
}

TEST_CASE("sampled td residual matches its exact expectation") {
  auto o = make_policy_eval(5, 3, 77, 0.9, 0.5);
  Rng rng(11);
  const Vec x = random_vec(3, rng);
  const Vec exact = o->exact_g(x);
  const int n = 100000;
  Vec mean = Vec::Zero(5 + 3);
  for (int i = 0; i < n; ++i) mean += o->eval_inner(x, o->draw_inner_sample(rng)).value;
  mean /= n;
  // 5 sigma / sqrt(n) with a crude per-coordinate sigma bound
  for (Index s = 0; s < 5; ++s)
    CHECK(std::abs(mean[s] - exact[s]) <= 5.0 * (1.0 + std::abs(exact[s])) / std::sqrt(double(n)));
  // pass-through block is deterministic; only summation rounding remains
  CHECK((mean.tail(3) - exact.tail(3)).norm() <= 1e-10);
}

TEST_CASE("policy evaluation dual maximizer beats random feasible points") {
  auto o = make_policy_eval(6, 3, 5, 0.8, 0.3);
  Rng rng(9);
  const Vec x = random_vec(3, rng);
  const Vec u = o->exact_g(x);
  const Vec best = o->y_star(x);
  const double f_best = o->exact_f(u, best);
  for (int k = 0; k < 200; ++k) {
    const Vec y = simplex_project(random_vec(6, rng));
    REQUIRE(f_best >= o->exact_f(u, y) - 1e-12);
  }
}

TEST_CASE("simplex projection frozen cases and properties") {
  Vec v(2);
  v << 0.5, 0.5;
  CHECK((simplex_project(v) - v).norm() == 0.0);
  v << 2, 0;
  CHECK(simplex_project(v)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(simplex_project(v)[1] == doctest::Approx(0.0).epsilon(1e-14));
  v << 0, 0;
  CHECK(simplex_project(v)[0] == doctest::Approx(0.5).epsilon(1e-14));

  Rng rng(14);
  for (int k = 0; k < 500; ++k) {
    const Vec a = random_vec(6, rng, 3.0);
    const Vec b = random_vec(6, rng, 3.0);
    const Vec pa = simplex_project(a);
    const Vec pb = simplex_project(b);
    REQUIRE(std::abs(pa.sum() - 1.0) <= 1e-12);
    REQUIRE(pa.minCoeff() >= 0.0);
    REQUIRE((simplex_project(pa) - pa).norm() <= 1e-12);      // idempotent
    REQUIRE((pa - pb).norm() <= (a - b).norm() + 1e-12);      // 1-Lipschitz
  }
}

TEST_CASE("auc surrogate pieces") {
  // p = 1/2, theta = 2: the dual regularizer g3 = p(1-p) theta^2 = 1
  AucDataset data = make_imbalanced_gaussian(40, 3, 0.5, 2);
  data.imratio = 0.5;
  auto o = make_linear_auc(data, 0.1, 8);
  const Dims d = o->dims();
  const Vec u = o->exact_g(Vec::Zero(d.dx));
  const Vec y2 = Vec::Constant(1, 2.0);
  const Vec y0 = Vec::Zero(1);
  // f(u, 2) = mean(g1 + 2 g2) - 1 and f(u, 0) = mean(g1)
  const double mean_g2 = o->exact_grad_y_f(u, y0)[0];  // d/dy at y=0
  CHECK(o->exact_f(u, y2) ==
        doctest::Approx(o->exact_f(u, y0) + 2.0 * mean_g2 - 1.0).epsilon(1e-12));

  // all-zero features and zero variables: every surrogate term vanishes
  AucDataset flat;
  flat.features = Mat::Zero(4, 2);
  flat.labels.resize(4);
  flat.labels << 1, 1, -1, -1;
  flat.imratio = 0.5;
  auto oz = make_linear_auc(flat, 0.1, 4);
  CHECK(oz->exact_f(Vec::Zero(4), Vec::Zero(1)) == 0.0);
}

TEST_CASE("auc sampled jacobian drops the second-order term, the exact one keeps it") {
  auto o = make_linear_auc(make_imbalanced_gaussian(30, 4, 0.3, 8), 0.2, 30);
  Rng rng(3);
  const Vec x = random_vec(6, rng);
  const InnerEval e = o->eval_inner(x, o->draw_inner_sample(rng));
  CHECK((e.jacobian - Mat::Identity(6, 6)).norm() == 0.0);
  const Mat exact = o->exact_jacobian(x);
  CHECK((exact - Mat::Identity(6, 6)).norm() > 1e-6);
}

TEST_CASE("auc dual maximizer and degenerate data") {
  auto o = make_linear_auc(make_imbalanced_gaussian(50, 3, 0.2, 4), 0.1, 10);
  Rng rng(5);
  const Vec x = random_vec(5, rng);
  const Vec u = o->exact_g(x);
  const Vec ys = o->y_star(x);
  const double f_star = o->exact_f(u, ys);
  CHECK(f_star >= o->exact_f(u, ys + Vec::Constant(1, 0.1)));
  CHECK(f_star >= o->exact_f(u, ys - Vec::Constant(1, 0.1)));
  CHECK(o->phi(x) == doctest::Approx(f_star).epsilon(1e-14));

  AucDataset bad = make_imbalanced_gaussian(10, 2, 0.3, 1);
  bad.labels.setConstant(1);
  CHECK_THROWS_AS(make_linear_auc(bad, 0.1, 4), ConfigError);
}

TEST_CASE("returns csv loader") {
  TempFile good("returns.csv", "date,a,b\n1,1.0,0.0\n2,1.0,0.0\n");
  const Mat m = load_returns_csv(good.path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 0.0);

  TempFile empty("empty.csv", "date,a,b\n");
  CHECK_THROWS_AS(load_returns_csv(empty.path), ParseError);

  TempFile ragged("ragged.csv", "date,a,b\n1,1.0,0.0\n2,1.0\n");
  CHECK_THROWS_WITH_AS(load_returns_csv(ragged.path),
                       doctest::Contains("row 3"), ParseError);

  TempFile alpha("alpha.csv", "date,a,b\n1,1.0,x7\n");
  CHECK_THROWS_WITH_AS(load_returns_csv(alpha.path),
                       doctest::Contains("column 3"), ParseError);

  CHECK_THROWS_AS(load_returns_csv("/tmp/cmx_does_not_exist.csv"), IoError);
}

TEST_CASE("mdp instance files round-trip") {
  Mat p, r;
  generate_mdp(7, 55, p, r);
  TempFile f("mdp.txt");
  save_mdp_instance(f.path, 55, p, r);
  std::uint64_t seed = 0;
  Mat p2, r2;
  load_mdp_instance(f.path, seed, p2, r2);
  CHECK(seed == 55);
  CHECK(exactly_equal(p, p2));
  CHECK(exactly_equal(r, r2));
}

TEST_CASE("auc instance files round-trip") {
  AucDataset d = make_imbalanced_gaussian(15, 3, 0.4, 77);
  TempFile f("auc.txt");
  save_auc_instance(f.path, 77, d);
  std::uint64_t seed = 0;
  AucDataset d2 = load_auc_instance(f.path, seed);
  CHECK(seed == 77);
  CHECK(exactly_equal(d.features, d2.features));
  CHECK((d.labels - d2.labels).cwiseAbs().maxCoeff() == 0);
  CHECK(d.imratio == d2.imratio);
}
