#include <gtest/gtest.h>

#include <random>

#include "dpplab/dpp.hpp"

using namespace dpplab;

namespace {

template <std::size_t N>
std::shared_ptr<const Grid<N>> grid_for(const Domain<N>& d, double eps, double h, double lambda = 1.0) {
  return std::make_shared<const Grid<N>>(build_grid(d, h, lambda * eps));
}

Scenario<1> interval(double eps, double alpha, const MeasureFamily<1>& fam) {
  Scenario<1> s;
  s.name = "t";
  s.domain = Domain<1>::box({0.0}, {1.0});
  s.params = Params{eps, alpha, 1.0 - alpha, fam.lambda()};
  s.h = eps / 4.0;
  s.family = fam;
  return s;
}

// Small random scenario with smooth data; families differ in kind and Λ.
template <std::size_t N>
Scenario<N> random_scenario(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Scenario<N> s;
  s.name = "random";
  const double eps = N == 1 ? 0.1 : 0.2;
  const double alpha = 0.4 * (u(gen) + 1.0);
  Vec<N> d;
  for (auto& c : d) c = u(gen);
  if (norm(d) > 1.0) d = (1.0 / norm(d)) * d;
  const bool dirac = gen() % 2 == 0;
  s.family = dirac ? MeasureFamily<N>::dirac_pair(1.0, d) : MeasureFamily<N>::uniform_ball(1.0, 0.5 + 0.5 * std::abs(u(gen)));
  s.domain = N == 1 ? Domain<N>::box(Vec<N>{}, filled<N>(1.0)) : Domain<N>::ball(Vec<N>{}, 0.6);
  s.params = Params{eps, alpha, 1.0 - alpha, 1.0};
  s.h = eps / 4.0;
  Vec<N> a, k;
  for (auto& c : a) c = u(gen);
  for (auto& c : k) c = 3.0 * u(gen);
  s.f = FunctionSpec<N>::quadratic(u(gen), a, u(gen));
  s.g = FunctionSpec<N>::cosine(k, 1.0 + u(gen));
  return s;
}

}  // namespace

TEST(BallRule, MomentsAndSymmetry) {
  for (double eps : {0.1, 0.25}) {
    const auto r1 = ball_rule<1>(eps, eps / 4.0);
    const auto r2 = ball_rule<2>(eps, eps / 5.0);
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < r1.offset.size(); ++i) {
      w += r1.weight[i];
      m1 += r1.weight[i] * r1.offset[i][0];
      m2 += r1.weight[i] * norm2(r1.offset[i]);
      EXPECT_LT(norm(r1.offset[i]), eps + 1e-12);
    }
    EXPECT_NEAR(w, 1.0, 1e-14);
    EXPECT_NEAR(m1, 0.0, 1e-15);
    EXPECT_NEAR(m2, eps * eps / 3.0, 1e-14);
    w = m2 = 0.0;
    for (std::size_t i = 0; i < r2.offset.size(); ++i) {
      w += r2.weight[i];
      m2 += r2.weight[i] * norm2(r2.offset[i]);
    }
    EXPECT_NEAR(w, 1.0, 1e-14);
    EXPECT_NEAR(m2, eps * eps / 2.0, 1e-14);
  }
}

TEST(BallAverage, ConstantLinearQuadratic) {
  const auto G = grid_for(Domain<1>::box({0.0}, {1.0}), 0.5, 0.125);
  const auto c = GridFunction<1>::sample(G, [](const Vec<1>&) { return 7.0; });
  EXPECT_NEAR(ball_average(c, {0.25}, 0.5), 7.0, 1e-14);
  const auto l = GridFunction<1>::sample(G, [](const Vec<1>& y) { return 2.0 * y[0] - 1.0; });
  EXPECT_NEAR(ball_average(l, {0.125}, 0.5), l.at({0.125}), 1e-14);
  const auto q = GridFunction<1>::sample(G, [](const Vec<1>& y) { return y[0] * y[0]; });
  EXPECT_NEAR(ball_average(q, {0.0}, 0.5), 1.0 / 12.0, 1e-12);
}

TEST(BallAverage, QuadraticTwoDimensions) {
  const double eps = 0.2;
  const auto G = grid_for(Domain<2>::ball({0.0, 0.0}, 0.5), eps, eps / 4.0);
  const auto q = GridFunction<2>::sample(G, [](const Vec<2>& y) { return norm2(y); });
  EXPECT_NEAR(ball_average(q, {0.0, 0.0}, eps), eps * eps / 2.0, 1e-12);
  EXPECT_NEAR(ball_average(q, {0.1, -0.05}, eps), 0.0125 + eps * eps / 2.0, 1e-12);
}

TEST(ApplyL, ConstantIsZero) {
  const auto G = grid_for(Domain<2>::ball({0.0, 0.0}, 0.5), 0.2, 0.05);
  const auto u = GridFunction<2>::sample(G, [](const Vec<2>&) { return -3.0; });
  const Params p{0.2, 0.5, 0.5, 1.0};
  EXPECT_NEAR(apply_L(u, MeasureFamily<2>::uniform_ball(1.0, 1.0), p, {0.1, 0.1}), 0.0, 1e-12);
}

TEST(ApplyL, QuadraticDiracPair) {
  const double eps = 0.2;
  const auto G = grid_for(Domain<1>::box({0.0}, {1.0}), eps, eps / 4.0);
  const auto u = GridFunction<1>::sample(G, [](const Vec<1>& y) { return y[0] * y[0]; });
  const Params p{eps, 0.5, 0.5, 1.0};
  const auto fam = MeasureFamily<1>::dirac_pair(1.0, {1.0});
  EXPECT_NEAR(apply_L(u, fam, p, {0.3}), 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(apply_L_second_difference(u, fam, p, {0.3}), 2.0 / 3.0, 1e-10);
}

TEST(ApplyL, QuadraticUniformBall) {
  const double eps = 0.2;
  const auto G = grid_for(Domain<2>::ball({0.0, 0.0}, 0.5), eps, eps / 4.0);
  const auto u = GridFunction<2>::sample(G, [](const Vec<2>& y) { return norm2(y); });
  const double h = eps / 4.0;
  for (double alpha : {0.0, 0.3, 0.7}) {
    const Params p{eps, alpha, 1.0 - alpha, 1.0};
    // the α-part reads u off-grid; multilinear interpolation of |y|² overshoots by at most N·h²/4
    const double interp = alpha * 2.0 * h * h / 4.0 / (eps * eps);
    const double v = apply_L(u, MeasureFamily<2>::uniform_ball(1.0, 1.0), p, {0.0, 0.0});
    EXPECT_GE(v, 0.5 - 1e-10);
    EXPECT_LE(v, 0.5 + interp + 1e-10);
  }
}

TEST(ApplyL, TwoFormsAgree) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  const double eps = 0.2;
  const auto G = grid_for(Domain<2>::ball({0.0, 0.0}, 0.5), eps, eps / 4.0, 1.5);
  EllipsoidField<2> e;
  e.axes = {1.5, 1.2};
  e.angle = 0.4;
  const std::vector<MeasureFamily<2>> fams = {MeasureFamily<2>::uniform_ball(1.5, 1.0),
                                              MeasureFamily<2>::dirac_pair(1.5, {0.6, -0.3}),
                                              MeasureFamily<2>::ellipsoid_shell(1.5, e)};
  for (int t = 0; t < 20; ++t) {
    GridFunction<2> u(G);
    for (auto& v : u.values()) v = nd(gen);
    const Vec<2> x{0.1 * nd(gen), 0.1 * nd(gen)};
    const Params p{eps, 0.5, 0.5, 1.5};
    for (const auto& fam : fams) EXPECT_NEAR(apply_L(u, fam, p, x), apply_L_second_difference(u, fam, p, x), 1e-10);
  }
}

TEST(ApplyLPucci, QuadraticAtLambda) {
  const double eps = 0.1;
  const auto G = grid_for(Domain<1>::box({0.0}, {1.0}), eps, eps / 4.0, 2.0);
  const auto u = GridFunction<1>::sample(G, [](const Vec<1>& y) { return y[0] * y[0]; });
  const Params p{eps, 0.5, 0.5, 2.0};
  const auto d = DirectionSet<1>::lattice(2.0, 8);
  EXPECT_NEAR(apply_L_pucci(u, d, p, {0.0}, Extremum::max), 13.0 / 6.0, 1e-10);
  EXPECT_NEAR(apply_L_pucci(u, d, p, {0.0}, Extremum::min), 1.0 / 6.0, 1e-10);
  const auto l = GridFunction<1>::sample(G, [](const Vec<1>& y) { return 4.0 * y[0] + 1.0; });
  EXPECT_NEAR(apply_L_pucci(l, d, p, {0.2}, Extremum::max), 0.0, 1e-10);
  EXPECT_NEAR(apply_L_pucci(l, d, p, {0.2}, Extremum::min), 0.0, 1e-10);
}

TEST(ApplyLPucci, BracketsLinearOperator) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> nd;
  const double eps = 0.2;
  const auto G = grid_for(Domain<2>::ball({0.0, 0.0}, 0.5), eps, eps / 4.0);
  const auto dirs = DirectionSet<2>::lattice(1.0, 4);
  const Params p{eps, 0.6, 0.4, 1.0};
  for (int t = 0; t < 100; ++t) {
    GridFunction<2> u(G);
    for (auto& v : u.values()) v = nd(gen);
    const Vec<2> x{0.1 * nd(gen), 0.1 * nd(gen)};
    const auto& z = dirs.dirs[gen() % dirs.dirs.size()];
    const double lin = apply_L(u, MeasureFamily<2>::dirac_pair(1.0, z), p, x);
    EXPECT_LE(apply_L_pucci(u, dirs, p, x, Extremum::min), lin + 1e-9);
    EXPECT_GE(apply_L_pucci(u, dirs, p, x, Extremum::max), lin - 1e-9);
  }
}

TEST(Residual, Classification) {
  auto s = builtin::linear_1d();
  const auto pb = make_problem(s);
  const auto S = assemble_rows(pb);
  const auto sol = solve_dpp(pb);
  ASSERT_TRUE(sol.converged);
  const double e2 = s.params.eps * s.params.eps;
  const auto r = residual(pb, S, sol.u, sol.tol / e2);
  EXPECT_EQ(r.classification, Classification::solution);
  EXPECT_LE(r.sup_norm, sol.last_increment / e2 * (1.0 + 1e-9));

  auto bumped = sol.u;
  for (auto f : pb.grid->interior_nodes()) bumped[f] += 1e-3 * s.domain.depth(pb.grid->coord(f));
  EXPECT_EQ(residual(pb, S, bumped, 1e-6).classification, Classification::neither);

  EXPECT_EQ(residual(pb, S, initial_subsolution(pb), 1e-9).classification, Classification::subsolution);
}

TEST(Residual, GenericFormMatchesAssembledRows) {
  std::mt19937_64 gen(12);
  auto s = random_scenario<2>(gen);
  const auto pb = make_problem(s);
  GridFunction<2> u(pb.grid);
  std::normal_distribution<double> nd;
  for (auto& v : u.values()) v = nd(gen);
  const auto a = residual(pb, assemble_rows(pb), u, 0.0);
  const auto b = residual(u, s.family, pb.f, s.params, 0.0);
  ASSERT_EQ(a.per_node.size(), b.per_node.size());
  for (std::size_t k = 0; k < a.per_node.size(); ++k) EXPECT_NEAR(a.per_node[k], b.per_node[k], 1e-8 * (1.0 + std::abs(a.per_node[k])));
}

TEST(InitialSubsolution, ZeroData) {
  auto s = interval(0.1, 0.5, MeasureFamily<1>::dirac_pair(1.0, {1.0}));
  const auto v = initial_subsolution(s);
  for (double x : v.values()) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(residual(s, v, 1e-12).classification, Classification::solution);
}

TEST(InitialSubsolution, QuadraticCoefficient) {
  const auto pb = make_problem(builtin::linear_1d());
  const auto v = initial_subsolution(pb);
  const auto& G = *pb.grid;
  const auto c = *G.find_node({0.0});
  for (auto f : G.interior_nodes()) EXPECT_NEAR(v[f] - v[c], 6.0 * norm2(G.coord(f)), 1e-12);
  // K is the smallest g − L|x|² over the collar, and g = 0 there
  double kmin = 1e300;
  for (std::size_t f = 0; f < G.size(); ++f)
    if (G.classify(f) == NodeClass::collar) kmin = std::min(kmin, -6.0 * norm2(G.coord(f)));
  EXPECT_NEAR(v[c], kmin, 1e-12);
}

TEST(InitialSubsolution, RandomScenariosAreSubsolutions) {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 20; ++t) {
    if (t % 2 == 0) {
      auto s = random_scenario<1>(gen);
      EXPECT_TRUE(residual(s, initial_subsolution(s), 1e-9).is_sub()) << t;
    } else {
      auto s = random_scenario<2>(gen);
      EXPECT_TRUE(residual(s, initial_subsolution(s), 1e-9).is_sub()) << t;
    }
  }
}

TEST(SolveDpp, AffineBoundaryDataIsReproduced) {
  Scenario<2> s;
  s.domain = Domain<2>::ball({0.0, 0.0}, 0.6);
  s.params = Params{0.2, 0.5, 0.5, 1.0};
  s.h = 0.05;
  s.family = MeasureFamily<2>::dirac_pair(1.0, {0.8, 0.6});
  s.g = FunctionSpec<2>::affine({1.5, -0.5}, 2.0);
  const auto r = solve_dpp(s, SolveOptions{SolveMode::monotone, 1e-13});
  ASSERT_TRUE(r.converged);
  const auto& G = r.u.grid();
  for (auto f : G.interior_nodes()) EXPECT_NEAR(r.u[f], s.g(G.coord(f)), 1e-9);
}

TEST(SolveDpp, PdeLimitAtSmallEps) {
  // (α/2 + β/6)u'' = −1 on (−1, 1), u(±1) = 0, so u(0) = 1.5
  const auto r = solve_dpp(builtin::linear_1d().with_eps(0.02));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.u.at({0.0}), 1.5, 0.03);
}

TEST(SolveDpp, MonotoneStaysAboveSubsolution) {
  const auto pb = make_problem(builtin::linear_1d());
  const auto v0 = initial_subsolution(pb);
  const auto r = solve_dpp(pb);
  for (std::size_t f = 0; f < v0.size(); ++f) EXPECT_GE(r.u[f], v0[f] - 1e-12);
  for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_EQ(r.log[i].iteration, r.log[i - 1].iteration + 1);
}

TEST(SolveDpp, StartingPointDoesNotMatter) {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 10; ++t) {
    auto s = random_scenario<1>(gen);
    const auto pb = make_problem(s);
    const auto a = solve_dpp(pb, SolveOptions{SolveMode::monotone});
    const auto b = solve_dpp(pb, SolveOptions{SolveMode::arbitrary_init});
    ASSERT_TRUE(a.converged && b.converged);
    double gap = 0.0;
    for (std::size_t f = 0; f < a.u.size(); ++f) gap = std::max(gap, std::abs(a.u[f] - b.u[f]));
    // distance to the fixed point is at most increment·E[τ]; E|X_k|² grows by ≥ βε²N/(N+2)
    // per step, so E[τ] ≤ (R + Λε)²(N + 2)/(Nβε²) with R = 1 here
    const double e = s.params.eps, reach = 1.0 + e;
    const double steps = reach * reach * 3.0 / (s.params.beta * e * e);
    EXPECT_LE(gap, 2.0 * a.tol * steps) << t;
  }
}

TEST(SolveDpp, RejectsCoarseGrid) {
  auto s = builtin::linear_1d();
  s.h = s.params.eps / 3.0;
  EXPECT_THROW(solve_dpp(s), LabError);
}

TEST(SolvePucci, LinearDataBothSigns) {
  auto s = builtin::pucci_1d();
  s.f = FunctionSpec<1>::constant(0.0);
  s.g = FunctionSpec<1>::affine({-2.0}, 0.5);
  for (auto k : {PucciKind::max, PucciKind::min}) {
    const auto r = solve_pucci(s, k, SolveOptions{SolveMode::monotone, 1e-13});
    ASSERT_TRUE(r.converged);
    const auto& G = r.u.grid();
    for (auto f : G.interior_nodes()) EXPECT_NEAR(r.u[f], s.g(G.coord(f)), 1e-9);
  }
}

TEST(SolvePucci, OrderingAroundLinearSolution) {
  // max ≥ linear ≥ min, and strictly for a source that makes u concave
  auto lin = interval(0.1, 0.5, MeasureFamily<1>::dirac_pair(1.0, {0.5}));
  lin.f = FunctionSpec<1>::constant(1.0);
  auto pc = lin;
  pc.family = MeasureFamily<1>::pucci_control(1.0, DirectionSet<1>::lattice(1.0, 8));
  const auto u = solve_dpp(lin).u;
  const auto mx = solve_pucci(pc, PucciKind::max).u;
  const auto mn = solve_pucci(pc, PucciKind::min).u;
  const double c = *u.grid().find_node({0.0});
  for (auto f : u.grid().interior_nodes()) {
    EXPECT_GE(mx[f], u[f] - 1e-8);
    EXPECT_LE(mn[f], u[f] + 1e-8);
  }
  EXPECT_GT(mx[c], u[c] + 1e-3);
  const auto [rp, rm] = pucci_residuals(make_problem(pc), mx, 1e-6);
  EXPECT_TRUE(rp.classification == Classification::solution) << rp.sup_norm;
  (void)rm;
}

TEST(Nonuniqueness, SmallAndLargeK) {
  const auto rep = nonuniqueness_check(20);
  ASSERT_EQ(rep.rows.size(), 20u);
  EXPECT_EQ(rep.rows[0].x, "1/2");
  EXPECT_EQ(rep.rows[0].lhs, "4");
  EXPECT_EQ(rep.rows[0].rhs, "4");
  EXPECT_EQ(rep.rows[0].error, "0");
  EXPECT_EQ(rep.rows[9].x, "1/1024");
  EXPECT_EQ(rep.rows[9].rhs, "1048576");
  EXPECT_EQ(rep.rows[19].rhs, "1099511627776");
  for (const auto& r : rep.rows) EXPECT_TRUE(r.holds);
  EXPECT_TRUE(rep.unbounded_solution_holds);
  EXPECT_TRUE(rep.zero_solution_holds);
  EXPECT_THROW(nonuniqueness_check(0), LabError);
}
