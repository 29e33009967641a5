#include <gtest/gtest.h>

#include <random>

#include "dpplab/grid_function.hpp"
#include "dpplab/measures.hpp"
#include "dpplab/stats.hpp"

using namespace dpplab;

namespace {

template <std::size_t N>
double sq_dist(const Vec<N>& a, const Vec<N>& b) {
  return norm2(a - b);
}

}  // namespace

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStreamTest, StepAddressing) {
  RandomStream a(9, 4, 17), b(9, 4, 0);
  b.set_step(17);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
  RandomStream c(9, 5, 17);
  RandomStream d(9, 4, 17);
  EXPECT_NE(c.next_u64(), d.next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double x = d.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Expect, DiracPairKillsLinear) {
  const auto fam = MeasureFamily<1>::dirac_pair(1.0, {1.0});
  EXPECT_DOUBLE_EQ(fam.expect({0.0}, 0.3, [](const Vec<1>& y) { return y[0]; }), 0.0);
}

TEST(Expect, UniformBallSecondMoment) {
  const auto f1 = MeasureFamily<1>::uniform_ball(1.0, 1.0);
  const double eps = 0.37;
  EXPECT_NEAR(f1.expect({0.4}, eps, [](const Vec<1>& y) { return sq_dist<1>(y, {0.4}); }), eps * eps / 3.0, 1e-12);
  const auto f2 = MeasureFamily<2>::uniform_ball(1.0, 1.0);
  const Vec<2> x{-0.2, 0.7};
  EXPECT_NEAR(f2.expect(x, eps, [&](const Vec<2>& y) { return sq_dist<2>(y, x); }), eps * eps * 2.0 / 4.0, 1e-12);
  const auto f3 = MeasureFamily<3>::uniform_ball(1.0, 1.0);
  EXPECT_NEAR(f3.second_moment({0.0, 0.0, 0.0}), 3.0 / 5.0, 1e-12);
}

TEST(Expect, UniformBallAgainstMonteCarlo) {
  // independent oracle: rejection sampling from std::mt19937_64
  const auto fam = MeasureFamily<2>::uniform_ball(1.0, 1.0);
  auto phi = [](const Vec<2>& y) { return std::cos(3.0 * y[0]) * std::exp(y[1]); };
  const double q = fam.expect({0.0, 0.0}, 0.8, phi);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> vals;
  while (vals.size() < 200000) {
    const Vec<2> z{u(gen), u(gen)};
    if (norm2(z) < 1.0) vals.push_back(phi(0.8 * z));
  }
  const auto m = moments(vals);
  EXPECT_NEAR(q, m.mean, 4.0 * m.se);
}

TEST(Expect, FiniteMixtureByHand) {
  Quadrature<2> q;
  q.add({1.0, 0.0}, 0.5);
  q.add({-1.0, 0.0}, 0.5);
  const auto fam = MeasureFamily<2>::finite_mixture(1.0, q);
  const Vec<2> x{0.3, 0.1};
  EXPECT_NEAR(fam.expect(x, 0.2, [&](const Vec<2>& y) { return sq_dist<2>(y, x); }), 0.04, 1e-15);
}

TEST(Expect, EllipsoidShellMomentsAgreeWithSampler) {
  EllipsoidField<2> e;
  e.axes = {2.0, 1.5};
  e.orientation = EllipsoidField<2>::Orientation::rotating;
  const auto fam = MeasureFamily<2>::ellipsoid_shell(2.0, e);
  const Vec<2> x{0.3, -0.4};
  std::vector<double> r2;
  for (std::size_t i = 0; i < 100000; ++i) {
    RandomStream rs(3, i, 0);
    r2.push_back(norm2(fam.sample(x, rs)));
  }
  const auto m = moments(r2);
  EXPECT_NEAR(fam.second_moment(x), m.mean, 4.0 * m.se + 1e-3);
}

TEST(Sample, DiracPairSupportAndMean) {
  const auto fam = MeasureFamily<2>::dirac_pair(1.0, {1.0, 0.0});
  const std::size_t n = 100000;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rs(1, i, 0);
    const auto z = fam.sample({0.0, 0.0}, rs);
    EXPECT_EQ(z[1], 0.0);
    EXPECT_EQ(std::abs(z[0]), 1.0);
    s += z[0];
  }
  EXPECT_LE(std::abs(s / n), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sample, UniformBallSecondMoment) {
  const auto fam = MeasureFamily<3>::uniform_ball(1.0, 1.0);
  std::vector<double> r2;
  for (std::size_t i = 0; i < 100000; ++i) {
    RandomStream rs(2, i, 0);
    const auto z = fam.sample({0.0, 0.0, 0.0}, rs);
    EXPECT_LT(norm(z), 1.0);
    r2.push_back(norm2(z));
  }
  const auto m = moments(r2);
  EXPECT_NEAR(m.mean, 3.0 / 5.0, 3.0 * m.se);
}

TEST(Sample, EllipsoidShellStaysInAnnulus) {
  EllipsoidField<2> e;
  e.axes = {2.0, 2.0};
  const auto fam = MeasureFamily<2>::ellipsoid_shell(2.0, e);
  for (std::size_t i = 0; i < 20000; ++i) {
    RandomStream rs(4, i, 0);
    const double r = norm(fam.sample({0.1, 0.1}, rs));
    EXPECT_GE(r, 1.0);
    EXPECT_LT(r, 2.0);
  }
}

TEST(Sample, LambdaBound) {
  PushMap<2> m;
  m.kind = PushMapKind::linear;
  m.matrix = {Vec<2>{3.0, 0.0}, Vec<2>{0.0, 0.5}};
  const auto fam = MeasureFamily<2>::pushforward(2.0, m);
  for (std::size_t i = 0; i < 5000; ++i) {
    RandomStream rs(5, i, 0);
    EXPECT_LE(norm(fam.sample({0.0, 0.0}, rs)), 2.0 + 1e-12);
  }
}

TEST(DirectionSetTest, LatticeIsSymmetricAndBounded) {
  const auto d = DirectionSet<2>::lattice(2.0, 8);
  for (const auto& z : d.dirs) {
    EXPECT_LE(norm(z), 2.0 + 1e-12);
    EXPECT_TRUE(d.contains(-z));
  }
  EXPECT_TRUE(d.contains({0.0, 0.0}));
  EXPECT_TRUE(d.contains({2.0, 0.0}));
}

TEST(PucciExtreme, LinearVanishes) {
  const auto G = std::make_shared<const Grid<2>>(build_grid(Domain<2>::box({0.0, 0.0}, {0.5, 0.5}), 0.025, 0.2));
  const auto u = GridFunction<2>::sample(G, [](const Vec<2>& y) { return 1.5 * y[0] - 0.25 * y[1] + 3.0; });
  const auto d = DirectionSet<2>::lattice(2.0, 8);
  EXPECT_NEAR(pucci_extreme(d, {0.1, 0.2}, 0.1, u, Extremum::max).value, 0.0, 1e-13);
  EXPECT_NEAR(pucci_extreme(d, {0.1, 0.2}, 0.1, u, Extremum::min).value, 0.0, 1e-13);
}

TEST(PucciExtreme, QuadraticAttainsAtLambda) {
  const auto G = std::make_shared<const Grid<2>>(build_grid(Domain<2>::box({0.0, 0.0}, {0.5, 0.5}), 0.025, 0.2));
  const auto u = GridFunction<2>::sample(G, [](const Vec<2>& y) { return norm2(y); });
  const auto d = DirectionSet<2>::lattice(2.0, 8);
  const auto mx = pucci_extreme(d, {0.0, 0.0}, 0.1, u, Extremum::max);
  const auto mn = pucci_extreme(d, {0.0, 0.0}, 0.1, u, Extremum::min);
  EXPECT_NEAR(mx.value, 0.04, 1e-14);
  EXPECT_NEAR(norm(d.dirs[mx.index]), 2.0, 1e-14);
  EXPECT_NEAR(mn.value, 0.0, 1e-14);
}

TEST(PucciExtreme, MaxDominatesMin) {
  const auto G = std::make_shared<const Grid<2>>(build_grid(Domain<2>::ball({0.0, 0.0}, 0.6), 0.05, 0.3));
  const auto d = DirectionSet<2>::lattice(1.5, 4);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    GridFunction<2> u(G);
    for (auto& v : u.values()) v = nd(gen);
    const Vec<2> x{0.3 * nd(gen) / 3.0, 0.3 * nd(gen) / 3.0};
    EXPECT_GE(pucci_extreme(d, x, 0.2, u, Extremum::max).value, pucci_extreme(d, x, 0.2, u, Extremum::min).value);
  }
}

TEST(Symmetry, DiracIsStructural) {
  const auto r = check_symmetry(MeasureFamily<2>::dirac_pair(1.0, {0.6, 0.8}), {0.0, 0.0}, 100);
  EXPECT_TRUE(r.structural);
  EXPECT_TRUE(r.pass);
}

TEST(Symmetry, IdentityPushforwardPasses) {
  const auto r = check_symmetry(MeasureFamily<2>::pushforward(1.0, PushMap<2>{}), {0.0, 0.0}, 10000);
  EXPECT_FALSE(r.structural);
  EXPECT_TRUE(r.pass) << r.statistic << " vs " << r.threshold;
}

TEST(Symmetry, ShiftedPushforwardFails) {
  PushMap<2> m;
  m.kind = PushMapKind::shift;
  m.shift = {0.3, 0.0};
  const auto r = check_symmetry(MeasureFamily<2>::pushforward(2.0, m), {0.0, 0.0}, 10000);
  EXPECT_FALSE(r.pass) << r.statistic << " vs " << r.threshold;
}

TEST(MeasureValidation, RejectsOversizedSupport) {
  EXPECT_THROW(MeasureFamily<1>::dirac_pair(1.0, {1.5}), LabError);
  EXPECT_THROW(MeasureFamily<1>::uniform_ball(1.0, 2.0), LabError);
}
