#include <gtest/gtest.h>

#include <random>

#include "dpplab/abp.hpp"

using namespace dpplab;

namespace {

// nodes 0, ½, 1 inside (−0.1, 1.1); collar nodes −½ and 3/2 carry −100
GridFunction<1> three_nodes(double a, double b, double c) {
  auto G = std::make_shared<const Grid<1>>(build_grid(Domain<1>::box({0.5}, {0.6}), 0.5, 0.5));
  GridFunction<1> u(G, -100.0);
  u[*G->find_node({0.0})] = a;
  u[*G->find_node({0.5})] = b;
  u[*G->find_node({1.0})] = c;
  return u;
}

std::vector<double> contact_coords(const Envelope<1>& env) {
  std::vector<double> out;
  for (auto f : contact_set(env).nodes) out.push_back(env.gamma.grid().coord(f)[0]);
  return out;
}

}  // namespace

TEST(Envelope, ThreeNodeHull) {
  const auto u = three_nodes(0.0, 1.0, 0.0);
  ASSERT_EQ(u.grid().interior_count(), 3u);
  const auto env = concave_envelope(u);
  EXPECT_DOUBLE_EQ(env.exterior_sup, -100.0);
  EXPECT_DOUBLE_EQ(env.gamma.at({0.0}), 0.0);
  EXPECT_DOUBLE_EQ(env.gamma.at({0.5}), 1.0);
  EXPECT_DOUBLE_EQ(env.gamma.at({1.0}), 0.0);
  EXPECT_DOUBLE_EQ(env.gamma.at({0.25}), 0.5);
  EXPECT_EQ(contact_coords(env), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Envelope, ThreeNodeChord) {
  const auto env = concave_envelope(three_nodes(0.0, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(env.gamma.at({0.5}), 0.5);
  EXPECT_DOUBLE_EQ(env.gamma.at({1.0}), 1.0);
  EXPECT_EQ(contact_coords(env), (std::vector<double>{0.0, 1.0}));
}

TEST(Envelope, ConcaveFunctionIsItsOwnEnvelope) {
  auto G = std::make_shared<const Grid<2>>(build_grid(Domain<2>::ball({0.0, 0.0}, 0.5), 0.025, 0.1));
  GridFunction<2> u(G);
  for (std::size_t i = 0; i < G->size(); ++i) u[i] = G->is_interior(i) ? 1.0 - norm2(G->coord(i) - Vec<2>{0.1, 0.0}) : -5.0;
  const auto env = concave_envelope(u);
  for (auto f : G->interior_nodes()) EXPECT_NEAR(env.gamma[f], u[f], 1e-9);
  // every interior node touches
  const auto c = contact_set(env);
  std::size_t inside = 0;
  for (auto f : c.nodes) inside += G->is_interior(f) ? 1u : 0u;
  EXPECT_EQ(inside, G->interior_count());
}

TEST(Envelope, DominatesAndIsConcaveOnRandomData) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  auto G = std::make_shared<const Grid<2>>(build_grid(Domain<2>::box({0.0, 0.0}, {0.3, 0.3}), 0.05, 0.1));
  for (int t = 0; t < 10; ++t) {
    GridFunction<2> u(G);
    for (auto& v : u.values()) v = nd(gen);
    const auto env = concave_envelope(u);
    for (std::size_t i = 0; i < G->size(); ++i) {
      if (!env.in_hull[i]) continue;
      EXPECT_GE(env.gamma[i], env.base[i] - 1e-12);
      // supporting plane with slope ξ stays above Γ at every hull node
      const auto x = G->coord(i);
      for (std::size_t j = 0; j < G->size(); j += 3)
        if (env.in_hull[j]) EXPECT_LE(env.gamma[j], env.gamma[i] + dot(env.slope[i], G->coord(j) - x) + 1e-9);
    }
    const auto again = reenvelope(env);
    for (std::size_t i = 0; i < G->size(); ++i)
      if (env.in_hull[i]) EXPECT_NEAR(again[i], env.gamma[i], 1e-9);
  }
}

TEST(Hull, ExactSignSurvivesCancellation) {
  EXPECT_EQ(hull::exact_sign(std::array<double, 3>{1e16, 1.0, -1e16}), 1);
  EXPECT_EQ(hull::exact_sign(std::array<double, 4>{1e16, -1.0, -1e16, 0.5}), -1);
  EXPECT_EQ(hull::exact_sign(std::array<double, 2>{0.1, -0.1}), 0);
  // the plane through p0 p1 p2 has height v1 + v2 − v0 above (1, 1), summed exactly
  const hull::Lifted p0{0, 0, 0.1}, p1{1, 0, 0.2}, p2{0, 1, 0.3}, p3{1, 1, 0.1 + 0.1 + 0.2};
  EXPECT_EQ(hull::orient(p0, p1, p2, p3), hull::exact_sign(std::array<double, 4>{p3.v, -0.2, -0.3, 0.1}));
  EXPECT_EQ(hull::orient(p0, p1, p2, {1, 1, 0.4}), hull::exact_sign(std::array<double, 4>{0.4, -0.2, -0.3, 0.1}));
  EXPECT_EQ(hull::orient(p0, p1, p2, {1, 1, 10.0}), 1);
  EXPECT_EQ(hull::orient(p0, p1, p2, {1, 1, -10.0}), -1);
}

TEST(Hull, MatchesTriangleOracle) {
  // concave envelope at a site = max over site triples whose triangle contains it
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> coord(0, 6);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    std::vector<hull::Lifted> pts;
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; b <= 6; ++b)
        if (coord(gen) < 4 || a == 0 || b == 0 || a == 6 || b == 6) pts.push_back({a, b, t % 4 == 0 ? 1.0 : nd(gen)});
    const auto env = hull::upper_envelope(pts);
    ASSERT_EQ(env.size(), pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      double best = pts[q].v;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
          for (std::size_t k = j + 1; k < pts.size(); ++k) {
            const auto cr = [&](const hull::Lifted& u, const hull::Lifted& v, const hull::Lifted& w) {
              return static_cast<double>((v.a - u.a) * (w.b - u.b) - (v.b - u.b) * (w.a - u.a));
            };
            const double area = cr(pts[i], pts[j], pts[k]);
            if (area == 0.0) continue;
            const double li = cr(pts[q], pts[j], pts[k]) / area, lj = cr(pts[i], pts[q], pts[k]) / area,
                         lk = cr(pts[i], pts[j], pts[q]) / area;
            if (li < 0.0 || lj < 0.0 || lk < 0.0) continue;
            best = std::max(best, li * pts[i].v + lj * pts[j].v + lk * pts[k].v);
          }
      EXPECT_NEAR(env[q].value, best, 1e-12);
      if (t % 4 == 0) {
        EXPECT_EQ(env[q].value, 1.0);
        EXPECT_EQ(env[q].sa, 0.0);
      }
    }
  }
}

TEST(Superdiff, AffineAndQuadratic) {
  const auto affine = [](const Vec<2>& y) { return 0.3 * y[0] - 2.0 * y[1] + 1.0; };
  EXPECT_NEAR(superdiff_bound<2>(affine, {0.2, 0.1}, {0.3, -2.0}, 0.4), 0.0, 1e-14);
  const auto cap = [](const Vec<2>& y) { return -norm2(y); };
  const Vec<2> x{0.3, -0.2};
  EXPECT_NEAR(superdiff_bound<2>(cap, x, -2.0 * x, 0.4), 0.2, 1e-12);
  const auto cap1 = [](const Vec<1>& y) { return -y[0] * y[0]; };
  EXPECT_NEAR(superdiff_bound<1>(cap1, {0.5}, {-1.0}, 0.4), 0.2, 1e-12);
}

TEST(Superdiff, GridFormOnQuadraticCap) {
  auto G = std::make_shared<const Grid<1>>(build_grid(Domain<1>::box({0.0}, {1.0}), 0.05, 0.4));
  GridFunction<1> u(G);
  for (std::size_t i = 0; i < G->size(); ++i) u[i] = G->is_interior(i) ? -G->coord(i)[0] * G->coord(i)[0] : -10.0;
  const auto env = concave_envelope(u);
  const auto node = *G->find_node({0.3});
  // nodes of B_{0.2}(x) sit every h; a one-sided chord slope adds at most h·r to the oscillation
  EXPECT_NEAR(superdiff_bound(env, node, 0.4), 0.2, 2.0 / 0.4 * 0.05 * 0.2 + 1e-12);
}

TEST(VerifyAbp, NonPositiveSubsolution) {
  const auto s = builtin::linear_1d();
  const auto v = initial_subsolution(s);
  const auto rep = verify_abp(s, v);
  EXPECT_LE(rep.lhs, 0.0);
  EXPECT_TRUE(rep.pass);
}

TEST(VerifyAbp, SolverOutputAndScaling) {
  auto s = builtin::linear_1d().with_eps(0.05);
  const auto u = solve_dpp(s).u;
  const auto rep = verify_abp(s, u);
  EXPECT_TRUE(rep.pass) << rep.lhs << " vs " << rep.rhs;
  EXPECT_GT(rep.lhs, 1.0);
  EXPECT_EQ(rep.constant, 32.0);
  EXPECT_NEAR(rep.rhs, rep.exterior_sup + rep.constant * rep.diameter_factor * rep.cube_sum * rep.eps, 1e-12 * rep.rhs);
  EXPECT_TRUE(rep.chain_pass);
  // u is still a subsolution when f doubles, with the same contact set
  s.f = FunctionSpec<1>::constant(2.0);
  const auto rep2 = verify_abp(s, u);
  EXPECT_EQ(rep2.cube_sum, 2.0 * rep.cube_sum);
  EXPECT_EQ(rep2.contact_nodes, rep.contact_nodes);
}

TEST(VerifyAbp, RejectsNonSubsolution) {
  const auto s = builtin::linear_1d();
  auto u = solve_dpp(s).u;
  for (auto f : u.grid().interior_nodes()) u[f] += 0.01 * std::cos(40.0 * u.grid().coord(f)[0]);
  EXPECT_THROW(verify_abp(s, u), LabError);
}

TEST(Mollify, ConstantAndZeroExtension) {
  const auto dom = Domain<2>::ball({0.0, 0.0}, 1.0);
  auto G = std::make_shared<const Grid<2>>(build_grid(dom, 0.05, 0.2));
  const auto m = mollify_f(FunctionSpec<2>::constant(3.0), dom, G, 0.2);
  EXPECT_NEAR(m.at({0.1, 0.2}), 3.0, 1e-12);
  EXPECT_EQ(m.at({1.2, 0.0}) + m.at({0.0, -1.25}), 0.0);
}

TEST(Mollify, HalfspaceInterface) {
  const auto dom = Domain<2>::box({0.0, 0.0}, {1.0, 1.0});
  const double eps = 0.2, h = 0.05;
  auto G = std::make_shared<const Grid<2>>(build_grid(dom, h, eps));
  const auto m = mollify_f(FunctionSpec<2>::halfspace({1.0, 0.0}, 0.0, 4.0), dom, G, eps);
  // oracle: the rule mass strictly on the positive side, from the rule itself
  const auto rule = ball_rule<2>(eps, h);
  double pos = 0.0, zero = 0.0;
  for (std::size_t k = 0; k < rule.offset.size(); ++k) {
    if (rule.offset[k][0] > 0.0) pos += rule.weight[k];
    if (rule.offset[k][0] == 0.0) zero += rule.weight[k];
  }
  EXPECT_NEAR(pos, 0.5 * (1.0 - zero), 1e-14);
  EXPECT_NEAR(m.at({0.0, 0.1}), 4.0 * pos, 1e-12);
  EXPECT_NEAR(m.at({0.0, 0.1}), 2.0, 4.0 * zero / 2.0 + 1e-12);
}

TEST(Measurable, CoverMultiplier) {
  EXPECT_EQ(cover_multiplier(1), 9);
  EXPECT_EQ(cover_multiplier(2), 13);
  EXPECT_EQ(cover_multiplier(4), 19);
  for (std::size_t n = 1; n <= 6; ++n) {
    const int l = cover_multiplier(n);
    EXPECT_EQ(l % 2, 1);
    EXPECT_GE(l, 9.0 * std::sqrt(static_cast<double>(n)));
    EXPECT_LT(l - 2, 9.0 * std::sqrt(static_cast<double>(n)));
  }
}

TEST(Measurable, ZeroSourceAndBoxIndicator) {
  auto s = std::get<Scenario<1>>(builtin_scenario("box-indicator-1d"));
  auto z = s;
  z.f = FunctionSpec<1>::constant(0.0);
  const auto r0 = verify_abp_measurable<1>(z, {0.0}, 2000, 1);
  EXPECT_EQ(r0.lhs, 0.0);
  EXPECT_TRUE(r0.pass);
  const auto r = verify_abp_measurable<1>(s, {0.0}, 20000, 1);
  EXPECT_TRUE(r.pass) << r.lhs << " vs " << r.rhs;
  EXPECT_EQ(r.ell, 9);
  EXPECT_NEAR(r.f_ln, 0.01, 1e-15);
  EXPECT_GT(r.lhs, 0.0);
}
