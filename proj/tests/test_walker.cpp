#include <gtest/gtest.h>

#include "dpplab/battery.hpp"
#include "dpplab/dpp.hpp"
#include "dpplab/walker.hpp"

using namespace dpplab;

namespace {

Scenario<2> square(double eps, double alpha, const MeasureFamily<2>& fam) {
  Scenario<2> s;
  s.name = "square";
  s.domain = Domain<2>::box({0.0, 0.0}, {0.5, 0.5});
  s.params = Params{eps, alpha, 1.0 - alpha, fam.lambda()};
  s.h = eps / 4.0;
  s.family = fam;
  return s;
}

std::vector<MeasureFamily<2>> five_families() {
  EllipsoidField<2> e;
  e.axes = {2.0, 1.2};
  e.orientation = EllipsoidField<2>::Orientation::rotating;
  Quadrature<2> q;
  q.add({1.5, 0.0}, 0.25);
  q.add({-1.5, 0.0}, 0.25);
  q.add({0.0, 0.5}, 0.25);
  q.add({0.0, -0.5}, 0.25);
  PushMap<2> m;
  m.kind = PushMapKind::linear;
  m.matrix = {Vec<2>{1.8, 0.0}, Vec<2>{0.0, 0.3}};
  return {MeasureFamily<2>::uniform_ball(2.0, 1.0), MeasureFamily<2>::dirac_pair(2.0, {2.0, 0.0}),
          MeasureFamily<2>::ellipsoid_shell(2.0, e), MeasureFamily<2>::finite_mixture(2.0, q),
          MeasureFamily<2>::pushforward(2.0, m)};
}

}  // namespace

TEST(Step, BallStepSecondMoment) {
  auto s = square(0.1, 0.0, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  std::vector<double> r2;
  for (std::size_t i = 0; i < 100000; ++i) {
    RandomStream rng(1, i);
    PathState<2> p;
    const auto q = step(p, s, rng);
    EXPECT_EQ(q.beta_steps, 1u);
    r2.push_back(norm2(q.x));
  }
  const auto m = moments(r2);
  EXPECT_NEAR(m.mean, 0.01 * 2.0 / 4.0, 4.0 * m.se);
}

TEST(Step, CoinFrequencyAndDiracLength) {
  const double alpha = 0.3, eps = 0.05;
  auto s = square(eps, alpha, MeasureFamily<2>::dirac_pair(1.0, {0.6, 0.8}));
  std::size_t a = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(2, i);
    PathState<2> p;
    p.x = {0.1, -0.2};
    const auto q = step(p, s, rng);
    EXPECT_EQ(q.k, 1u);
    EXPECT_DOUBLE_EQ(q.payoff, 0.0);
    if (q.alpha_steps == 1) {
      ++a;
      EXPECT_NEAR(norm(q.x - p.x), eps, 1e-15);
    } else {
      EXPECT_LT(norm(q.x - p.x), eps);
    }
  }
  const double se = std::sqrt(alpha * (1.0 - alpha) / n);
  EXPECT_NEAR(static_cast<double>(a) / n, alpha, 4.0 * se);
}

TEST(RunToExit, LandsInOuterCollar) {
  for (const auto& fam : five_families()) {
    auto s = square(0.1, 0.5, fam);
    for (std::size_t i = 0; i < 300; ++i) {
      RandomStream rng(3, i);
      const auto p = run_to_exit<2>({0.2, -0.1}, s, rng, default_step_cap(0.1));
      EXPECT_FALSE(p.capped);
      EXPECT_GE(p.tau, 1u);
      EXPECT_FALSE(s.domain.contains(p.exit_point));
      EXPECT_LE(s.domain.distance(p.exit_point), s.lambda_eps() + 1e-12);
    }
  }
}

TEST(RunToExit, StepCapIsReported) {
  auto s = square(0.01, 0.0, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  RandomStream rng(1, 0);
  const auto p = run_to_exit<2>({0.0, 0.0}, s, rng, 10);
  EXPECT_TRUE(p.capped);
  EXPECT_TRUE(std::isnan(p.payoff));
}

TEST(EstimateValue, ConstantDataIsExact) {
  auto s = square(0.1, 0.5, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  s.g = FunctionSpec<2>::constant(2.75);
  const auto e = estimate_value<2>({0.1, 0.1}, s, 2000, 7);
  EXPECT_EQ(e.mean, 2.75);
  EXPECT_EQ(e.se, 0.0);
  EXPECT_EQ(e.capped, 0u);
}

TEST(EstimateValue, LinearPayoffIsMartingale) {
  auto s = square(0.1, 0.5, MeasureFamily<2>::dirac_pair(1.0, {0.0, 1.0}));
  s.g = FunctionSpec<2>::affine({1.0, -2.0}, 0.5);
  const Vec<2> x0{0.2, 0.1};
  const auto e = estimate_value(x0, s, 20000, 11);
  EXPECT_NEAR(e.mean, s.g(x0), 3.0 * e.se);
}

TEST(EstimateValue, AgreesWithSolver) {
  const auto s = builtin::linear_1d();
  const auto u = solve_dpp(s).u;
  const auto e = estimate_value<1>({0.3}, s, 20000, 5);
  EXPECT_NEAR(e.mean, u.at({0.3}), 3.0 * e.se + kGridTolerance * s.h);
}

TEST(EstimateValue, WorkerCountDoesNotChangeBits) {
  const auto s = builtin::uniform_2d();
  set_worker_count(1);
  const auto a = estimate_value<2>({0.2, 0.0}, s, 3000, 9);
  const auto ta = exit_time_stats<2>({0.2, 0.0}, s, 3000, 9);
  set_worker_count(3);
  const auto b = estimate_value<2>({0.2, 0.0}, s, 3000, 9);
  const auto tb = exit_time_stats<2>({0.2, 0.0}, s, 3000, 9);
  set_worker_count(0);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.se, b.se);
  EXPECT_EQ(ta.time.mean, tb.time.mean);
  EXPECT_EQ(ta.time_sq.mean, tb.time_sq.mean);
}

TEST(ExitTime, WithinBoundsWithExponentialTail) {
  const auto s = std::get<Scenario<1>>(builtin_scenario("exit-1d"));
  const auto r = exit_time_stats<1>({0.0}, s, 20000, 3);
  EXPECT_EQ(r.capped, 0u);
  EXPECT_TRUE(r.within_bounds) << r.lower << " " << r.time.mean << " " << r.upper;
  EXPECT_LE(r.lower, r.upper);
  EXPECT_GE(r.tail_fit_points, 5u);
  EXPECT_LT(r.tail_fit.slope, 0.0);
  EXPECT_GE(r.tail_fit.r2, 0.9);
  // α = 0 in 1D: E[ε²τ] → 3·(1 − x0²) as ε → 0, and the discrete walk overshoots
  EXPECT_GT(r.time.mean, 3.0 - 4.0 * r.time.se);
}

TEST(Drift, BallWalkAndMixedWalk) {
  auto s = square(0.1, 0.0, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  const auto r = drift_check<2>({0.0, 0.0}, s, 40000, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(r.lower, r.upper);
  EXPECT_NEAR(r.drift.mean, 0.005, 4.0 * r.drift.se);
  for (const auto& fam : five_families()) {
    auto m = square(0.1, 0.6, fam);
    const auto d = drift_check<2>({0.1, 0.0}, m, 20000, 2);
    EXPECT_LT(d.lower, d.upper);
    EXPECT_TRUE(d.pass) << fam.kind_name() << " " << d.drift.mean;
  }
}

TEST(Hitting, StartInsideTarget) {
  auto s = square(0.1, 0.5, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  Region<2> a({Domain<2>::ball({0.0, 0.0}, 0.1)});
  Region<2> stop({s.domain});
  const auto e = hitting_prob<2>({0.0, 0.0}, a, stop, s, 500, 1);
  EXPECT_EQ(e.mean, 1.0);
}

TEST(Hitting, MonotoneInTarget) {
  auto s = square(0.05, 0.5, MeasureFamily<2>::dirac_pair(1.0, {1.0, 0.0}));
  Region<2> stop({s.domain});
  Region<2> small({Domain<2>::ball({0.3, 0.3}, 0.05)});
  Region<2> large({Domain<2>::ball({0.3, 0.3}, 0.05), Domain<2>::ball({-0.3, 0.2}, 0.1)});
  const auto p1 = hitting_prob<2>({0.0, 0.0}, small, stop, s, 4000, 5);
  const auto p2 = hitting_prob<2>({0.0, 0.0}, large, stop, s, 4000, 5);
  EXPECT_LE(p1.mean, p2.mean);
  EXPECT_GT(p2.mean, p1.mean);
}

TEST(Hitting, DenseTargetHasPositiveFloor) {
  // A = Q_1 minus a hole of measure 0.04 around x0, stop at Q_3
  Region<2> stop({Domain<2>::box({0.0, 0.0}, {1.5, 1.5})});
  const Vec<2> x0{0.1, -0.1};
  Region<2> a({Domain<2>::box({0.0, 0.35}, {0.5, 0.15}), Domain<2>::box({0.0, -0.4}, {0.5, 0.1}),
               Domain<2>::box({-0.35, 0.0}, {0.15, 0.2}), Domain<2>::box({0.35, 0.0}, {0.15, 0.2})});
  ASSERT_FALSE(a.contains(x0));
  for (const auto& fam : five_families()) {
    auto s = square(0.05, 0.5, fam);
    s.domain = Domain<2>::box({0.0, 0.0}, {1.5, 1.5});
    const auto e = hitting_prob(x0, a, stop, s, 2000, 13);
    EXPECT_GT(e.mean, 0.5) << fam.kind_name();
  }
}

TEST(LnFailure, PayoffWithoutLnMass) {
  const auto s = std::get<Scenario<2>>(builtin_scenario("ln-failure-2d"));
  const auto r = ln_abp_failure_demo(s, 20000, 1);
  EXPECT_EQ(r.s_norm, 0.0);
  EXPECT_GE(r.s_payoff.mean, 0.1);
  EXPECT_NEAR(r.alpha_hit_rate, 0.5, 4.0 * r.alpha_hit_se);
  EXPECT_TRUE(r.pass);
}

TEST(Walker, RejectsPucciFamily) {
  const auto s = std::get<Scenario<1>>(builtin_scenario("pucci-1d"));
  EXPECT_THROW(estimate_value<1>({0.0}, s, 10, 1), LabError);
}
