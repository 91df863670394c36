#include <doctest.h>

#include <cmath>

#include "cmx/optimizers.hpp"
#include "cmx/problems/linquad.hpp"
#include "cmx/problems/toy.hpp"
#include "test_support.hpp"

using namespace cmx;

TEST_CASE("nstorm step frozen arithmetic on the noiseless toy") {
  auto o = make_toy();
  Rng rng(1);
  NstormConfig cfg;
  cfg.gamma = 1.0;
  cfg.schedule = Schedule(6.0, 1.0, 1.0);  // eta(2) = 8^(-1/3) = 1/2
  Iterates it{Vec::Constant(1, 1.0), Vec::Zero(1)};
  EstimatorState est = init_state(*o, it.x, it.y, o->draw_inner_sample(rng));
  StepOutput out = nstorm_step(it, est, cfg, *o, rng);
  CHECK(out.eta == doctest::Approx(0.5).epsilon(1e-15));
  // v = -16, w = 4: x' = 1 - 0.5*(-16) = 9, y' = 0 + 0.5*4 = 2
  CHECK(it.x[0] == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(it.y[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("pl step scales the ascent direction by lambda") {
  auto o = make_toy();
  Rng rng(1);
  PlConfig cfg;
  cfg.gamma = 1.0;
  cfg.lambda = 2.0;
  cfg.schedule = Schedule(6.0, 1.0, 1.0);
  Iterates it{Vec::Constant(1, 1.0), Vec::Zero(1)};
  EstimatorState est = init_state(*o, it.x, it.y, o->draw_inner_sample(rng));
  pl_step(it, est, cfg, *o, rng);
  // w = 4, eta = 1/2, lambda = 2: y' = 0 + 2 * 0.5 * 4 = 4
  CHECK(it.y[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(it.x[0] == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("pl with lambda 1 reproduces nstorm on the same token stream") {
  auto o = make_toy(0.4, 0.4, 0.4);
  NstormConfig ncfg;
  ncfg.gamma = 0.02;
  PlConfig pcfg;
  pcfg.gamma = 0.02;
  pcfg.lambda = 1.0;

  Rng rng_a(77), rng_b(77);
  Iterates a{Vec::Constant(1, 1.0), Vec::Zero(1)};
  Iterates b = a;
  EstimatorState ea = init_state(*o, a.x, a.y, o->draw_inner_sample(rng_a));
  EstimatorState eb = init_state(*o, b.x, b.y, o->draw_inner_sample(rng_b));
  for (int t = 0; t < 50; ++t) {
    nstorm_step(a, ea, ncfg, *o, rng_a);
    pl_step(b, eb, pcfg, *o, rng_b);
    REQUIRE(a.x[0] == b.x[0]);
    REQUIRE(a.y[0] == b.y[0]);
  }
}

TEST_CASE("ada-nstorm with identity matrices reproduces nstorm") {
  // tau = 1 freezes the accumulators at zero and rho = 1 makes A = B = I
  auto o = make_linquad(3, 4, 2, 21, 0.3, 0.3, 0.3);
  NstormConfig ncfg;
  ncfg.gamma = 0.05;
  AdaNstormConfig acfg;
  acfg.gamma = 0.05;
  acfg.lambda = 1.0;
  acfg.tau = 1.0;
  acfg.rho = 1.0;

  Rng rng_a(5), rng_b(5);
  Iterates a{Vec::Ones(3), Vec::Zero(2)};
  Iterates b = a;
  EstimatorState ea = init_state(*o, a.x, a.y, o->draw_inner_sample(rng_a));
  EstimatorState eb = init_state(*o, b.x, b.y, o->draw_inner_sample(rng_b));
  GeneratorState gen = GeneratorState::zeros(3, 2);
  for (int t = 0; t < 100; ++t) {
    nstorm_step(a, ea, ncfg, *o, rng_a);
    ada_nstorm_step(b, eb, gen, acfg, *o, rng_b);
    REQUIRE((a.x - b.x).lpNorm<Eigen::Infinity>() <= 1e-12);
    REQUIRE((a.y - b.y).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("scgda keeps an exponential average of the inner values") {
  auto o = make_toy();  // zero noise: samples equal the exact values
  Rng rng(2);
  ScgdaConfig cfg;
  cfg.gamma = 0.02;
  Iterates it{Vec::Constant(1, 1.0), Vec::Constant(1, 4.0)};
  BaselineState st{o->exact_g(it.x), 1};
  const double beta2 = cfg.schedule.beta(2);
  const double x0 = it.x[0];
  const double u_expect = (1.0 - beta2) * 2.0 + beta2 * (2.0 * x0);
  scgda_step(it, st, cfg, *o, rng);
  CHECK(st.u[0] == doctest::Approx(u_expect).epsilon(1e-14));
  CHECK(st.t == 2);
}

TEST_CASE("sgda plugs the sampled inner value straight in") {
  auto o = make_toy();
  Rng rng(2);
  SgdaConfig cfg;
  cfg.gamma = 1.0;
  cfg.schedule = Schedule(6.0, 1.0, 1.0);
  Iterates it{Vec::Constant(1, 1.0), Vec::Zero(1)};
  long t = 1;
  sgda_step(it, t, cfg, *o, rng);
  // same noiseless gradients as the nstorm frozen case
  CHECK(it.x[0] == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(it.y[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t == 2);
}

TEST_CASE("y initialization policies") {
  auto o = make_toy();
  const Vec x1 = Vec::Constant(1, 1.0);

  YInitPolicy exact;
  CHECK(init_y(*o, x1, exact)[0] == doctest::Approx(4.0).epsilon(1e-14));

  YInitPolicy given;
  given.kind = YInitPolicy::Kind::Given;
  given.given = Vec::Constant(1, 7.0);
  CHECK(init_y(*o, x1, given)[0] == 7.0);
  given.given = Vec::Zero(2);
  CHECK_THROWS_AS(init_y(*o, x1, given), ConfigError);

  YInitPolicy ascent;
  ascent.kind = YInitPolicy::Kind::InnerAscent;
  ascent.ascent_steps = 400;
  CHECK(init_y(*o, x1, ascent)[0] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("run bookkeeping: trajectory grid and sample budget") {
  auto base = make_toy(0.2, 0.2, 0.2);
  auto counting = std::make_shared<testsupport::CountingOracle>(base);
  NstormConfig cfg;
  cfg.gamma = 0.02;
  cfg.T = 100;
  MethodConfig method = cfg;
  Rng rng(4);
  YInitPolicy yinit;
  Trajectory traj = run_method(*counting, method, Vec::Constant(1, 1.0), yinit, rng, 10);
  CHECK(traj.points.size() == 11);  // t = 1 plus each multiple of 10
  CHECK(traj.points.front().t == 1);
  CHECK(traj.points.back().t == 100);
  CHECK(traj.total_samples == 2 * 100 - 1);
  CHECK(counting->draws == traj.total_samples);
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    CHECK(traj.points[i].t > traj.points[i - 1].t);
    CHECK(traj.points[i].samples >= traj.points[i - 1].samples);
  }
}

TEST_CASE("T = 1 leaves only the initial point") {
  auto o = make_toy();
  NstormConfig cfg;
  cfg.T = 1;
  MethodConfig method = cfg;
  Rng rng(4);
  Trajectory traj = run_method(*o, method, Vec::Constant(1, 1.0), YInitPolicy{}, rng, 1);
  CHECK(traj.points.size() == 1);
  CHECK(traj.total_samples == 1);
  CHECK(traj.points[0].x[0] == 1.0);
}

TEST_CASE("baselines draw the same per-iteration budget") {
  auto base = make_toy(0.2, 0.2, 0.2);
  auto counting = std::make_shared<testsupport::CountingOracle>(base);
  SgdaConfig cfg;
  cfg.gamma = 0.02;
  cfg.T = 50;
  MethodConfig method = cfg;
  Rng rng(4);
  Trajectory traj = run_method(*counting, method, Vec::Constant(1, 1.0), YInitPolicy{}, rng, 1);
  CHECK(counting->draws == traj.total_samples);
  CHECK(traj.total_samples == 2 * (50 - 1));
}

TEST_CASE("path length sums segment distances") {
  Trajectory traj;
  for (int k = 0; k < 5; ++k) {
    TrajPoint p;
    p.t = k + 1;
    p.x = Vec::Constant(1, 3.0 * k);  // straight line, steps of length 3
    p.y = Vec::Zero(1);
    traj.points.push_back(p);
  }
  CHECK(path_length(traj) == doctest::Approx(12.0).epsilon(1e-14));

  Trajectory flat;
  TrajPoint p;
  p.x = Vec::Zero(2);
  p.y = Vec::Zero(1);
  flat.points.assign(3, p);
  CHECK(path_length(flat) == 0.0);

  Trajectory single;
  single.points.push_back(p);
  CHECK_THROWS_AS(path_length(single), Error);
}

TEST_CASE("observer sees every iteration even when logging is sparse") {
  auto o = make_toy(0.1, 0.1, 0.1);
  NstormConfig cfg;
  cfg.gamma = 0.02;
  cfg.T = 40;
  MethodConfig method = cfg;
  Rng rng(8);
  long calls = 0;
  bool est_seen = true;
  run_method(*o, method, Vec::Constant(1, 1.0), YInitPolicy{}, rng, 10,
             [&](const StepView& view) {
               ++calls;
               est_seen = est_seen && view.est != nullptr;
             });
  CHECK(calls == 40);
  CHECK(est_seen);
}

TEST_CASE("config validation catches bad method parameters") {
  NstormConfig n;
  n.gamma = 1.5;
  CHECK_THROWS_AS(n.validate(), ConfigError);
  AdaNstormConfig a;
  a.tau = 0.0;
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a = {};
  a.generator = GeneratorKind::AdaBound;
  a.bound_lower = 2.0;
  a.bound_upper = 1.0;
  CHECK_THROWS_AS(a.validate(), ConfigError);
  PlConfig p;
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
