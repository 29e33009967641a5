#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dpplab/geometry.hpp"

using namespace dpplab;

namespace {

template <std::size_t N>
std::vector<Vec<N>> interior_coords(const Grid<N>& g) {
  std::vector<Vec<N>> out;
  for (auto f : g.interior_nodes()) out.push_back(g.coord(f));
  return out;
}

}  // namespace

TEST(Collar, IntervalMargin) {
  const auto c = make_collar(Domain<1>::box({0.0}, {1.0}), 0.1);
  EXPECT_TRUE(c.contains({1.05}));
  EXPECT_FALSE(c.contains({1.15}));
  EXPECT_TRUE(c.contains({0.0}));
  EXPECT_FALSE(c.contains({-1.1}));
}

TEST(Collar, BallCollarIsBall) {
  const auto c = make_collar(Domain<2>::ball({0.0, 0.0}, 1.0), 0.5);
  const auto big = Domain<2>::ball({0.0, 0.0}, 1.5);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec<2> x{u(gen), u(gen)};
    EXPECT_EQ(c.contains(x), big.contains(x)) << x[0] << "," << x[1];
  }
}

TEST(Collar, SquareCorner) {
  const auto c = make_collar(Domain<2>::box({0.5, 0.5}, {0.5, 0.5}), 0.1);
  // 0.07·√2 ≈ 0.0990 and 0.071·√2 ≈ 0.1004
  EXPECT_TRUE(c.contains({1.07, 1.07}));
  EXPECT_FALSE(c.contains({1.071, 1.071}));
}

TEST(Collar, RejectsNonPositiveMargin) {
  EXPECT_THROW(make_collar(Domain<1>::box({0.0}, {1.0}), 0.0), LabError);
}

TEST(DomainTest, DistanceAndDepth) {
  const auto b = Domain<2>::box({0.0, 0.0}, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(b.distance({0.5, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(b.distance({4.0, 6.0}), 5.0);
  EXPECT_DOUBLE_EQ(b.depth({0.5, 0.0}), 0.5);
  EXPECT_NEAR(b.diameter(), 2.0 * std::sqrt(5.0), 1e-14);
  EXPECT_DOUBLE_EQ(b.volume(), 8.0);
  const auto ball = Domain<2>::ball({1.0, 0.0}, 2.0);
  EXPECT_DOUBLE_EQ(ball.depth({1.0, 0.5}), 1.5);
  EXPECT_DOUBLE_EQ(ball.distance({1.0, 5.0}), 3.0);
  EXPECT_NEAR(ball.volume(), 4.0 * pi, 1e-13);
}

TEST(RegionTest, DisjointMeasure) {
  Region<1> r({Domain<1>::box({0.0}, {0.1}), Domain<1>::box({1.0}, {0.2})});
  ASSERT_TRUE(r.disjoint_measure().has_value());
  EXPECT_NEAR(*r.disjoint_measure(), 0.6, 1e-15);
  Region<1> o({Domain<1>::box({0.0}, {0.5}), Domain<1>::box({0.4}, {0.5})});
  EXPECT_FALSE(o.disjoint_measure().has_value());
  EXPECT_TRUE(o.contains({0.8}));
  EXPECT_FALSE(o.contains({0.95}));
}

TEST(EpsCover, SinglePoint) {
  const auto cs = eps_cover<1>(std::vector<Vec<1>>{{0.1}}, 4.0);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_DOUBLE_EQ(cs[0].side, 1.0);
  EXPECT_TRUE(cs[0].closure_contains({0.1}));
}

TEST(EpsCover, IntervalCoveredByThreeOrFour) {
  const auto cs = eps_cover(Domain<1>::box({1.25}, {1.25}), 4.0);
  EXPECT_GE(cs.size(), 3u);
  EXPECT_LE(cs.size(), 4u);
  for (double x = 0.0; x <= 2.5; x += 0.01) {
    const bool hit = std::any_of(cs.begin(), cs.end(), [&](const auto& q) { return q.closure_contains({x}); });
    EXPECT_TRUE(hit) << x;
  }
}

TEST(EpsCover, LatticeCornerTouchesFour) {
  // side 1, so (0.5, 0.5) is a corner shared by four cells
  const auto cs = eps_cover<2>(std::vector<Vec<2>>{{0.5, 0.5}}, 4.0 * std::sqrt(2.0));
  EXPECT_EQ(cs.size(), 4u);
  for (const auto& q : cs) EXPECT_TRUE(q.closure_contains({0.5, 0.5}));
}

TEST(EpsCover, EmptyInput) {
  EXPECT_TRUE(eps_cover<2>(std::vector<Vec<2>>{}, 1.0).empty());
  EXPECT_THROW(eps_cover<1>(std::vector<Vec<1>>{{0.0}}, 0.0), LabError);
}

TEST(EpsCover, BallCellsHaveSmallDiameter) {
  const double eps = 0.3;
  const auto ball = Domain<2>::ball({0.2, -0.1}, 0.5);
  const auto cs = eps_cover(ball, eps);
  for (const auto& q : cs) EXPECT_NEAR(q.diameter(), eps / 4.0, 1e-15);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec<2> x{0.2 + 0.5 * u(gen), -0.1 + 0.5 * u(gen)};
    if (!ball.contains(x)) continue;
    EXPECT_TRUE(std::any_of(cs.begin(), cs.end(), [&](const auto& q) { return q.closure_contains(x); }));
  }
}

TEST(Dyadic, HalvingInOneDimension) {
  const auto kids = dyadic_split(dyadic_root<1>());
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_DOUBLE_EQ(kids[0].center[0], -0.25);
  EXPECT_DOUBLE_EQ(kids[1].center[0], 0.25);
  for (const auto& k : kids) {
    EXPECT_DOUBLE_EQ(k.side, 0.5);
    EXPECT_EQ(k.generation, 1);
  }
}

TEST(Dyadic, Quadrants) {
  const auto kids = dyadic_split(dyadic_root<2>());
  ASSERT_EQ(kids.size(), 4u);
  double vol = 0.0;
  for (const auto& k : kids) {
    EXPECT_DOUBLE_EQ(k.side, 0.5);
    EXPECT_DOUBLE_EQ(std::abs(k.center[0]), 0.25);
    EXPECT_DOUBLE_EQ(std::abs(k.center[1]), 0.25);
    vol += k.volume();
  }
  EXPECT_DOUBLE_EQ(vol, 1.0);
}

TEST(Dyadic, PredecessorRoundTrip) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 100; ++t) {
    Cube<2> q = dyadic_root<2>({0.5, 0.5}, 1.0);
    const int depth = 1 + static_cast<int>(gen() % 7);
    std::vector<Cube<2>> chain{q};
    for (int d = 0; d < depth; ++d) {
      const auto kids = dyadic_split(chain.back());
      chain.push_back(kids[gen() % kids.size()]);
    }
    for (int d = depth; d > 0; --d) {
      const auto p = dyadic_pre(chain[static_cast<std::size_t>(d)]);
      EXPECT_EQ(p.generation, d - 1);
      EXPECT_EQ(p.address->index, chain[static_cast<std::size_t>(d) - 1].address->index);
      EXPECT_DOUBLE_EQ(p.center[0], chain[static_cast<std::size_t>(d) - 1].center[0]);
      // the child sits inside its predecessor
      EXPECT_TRUE(p.closure_contains(chain[static_cast<std::size_t>(d)].center));
    }
  }
  EXPECT_THROW(dyadic_pre(dyadic_root<1>()), LabError);
}

TEST(GridTest, OneDimensionalInterior) {
  const auto g = build_grid(Domain<1>::box({0.0}, {1.0}), 0.5, 1.0);
  const auto in = interior_coords(g);
  ASSERT_EQ(in.size(), 3u);
  EXPECT_DOUBLE_EQ(in[0][0], -0.5);
  EXPECT_DOUBLE_EQ(in[1][0], 0.0);
  EXPECT_DOUBLE_EQ(in[2][0], 0.5);
  // physical collar nodes: ±1 and ±1.5 (distance 0 and 0.5), ±2 sits at distance 1
  std::vector<double> phys;
  for (std::size_t f = 0; f < g.size(); ++f)
    if (g.in_physical_collar(f)) phys.push_back(g.coord(f)[0]);
  EXPECT_EQ(phys, (std::vector<double>{-1.5, -1.0, 1.0, 1.5}));
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double x = g.coord(f)[0];
    if (std::abs(x) >= 1.0) EXPECT_NE(g.classify(f), NodeClass::interior);
  }
}

TEST(GridTest, BallWithUnitSpacing) {
  const auto g = build_grid(Domain<2>::ball({0.0, 0.0}, 1.0), 1.0, 1.0);
  const auto in = interior_coords(g);
  ASSERT_EQ(in.size(), 1u);
  EXPECT_DOUBLE_EQ(in[0][0], 0.0);
  EXPECT_DOUBLE_EQ(in[0][1], 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto x = g.coord(f);
    const bool phys = g.in_physical_collar(f);
    EXPECT_EQ(phys, !g.is_interior(f) && norm(x) < 2.0) << x[0] << "," << x[1];
  }
}

TEST(GridTest, NoInteriorNode) {
  try {
    build_grid(Domain<1>::box({0.25}, {0.1}), 1.0, 0.5);
    FAIL() << "expected an error";
  } catch (const LabError& e) {
    EXPECT_NE(std::string(e.what()).find("no interior node"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
}

TEST(GridTest, StencilIsConvexAndClassified) {
  const double eps = 0.2, h = 0.05;
  const auto g = build_grid(Domain<2>::box({0.0, 0.0}, {0.5, 0.5}), h, eps);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec<2> x{0.5 * u(gen), 0.5 * u(gen)};
    const Vec<2> z{u(gen), u(gen)};
    if (norm(z) >= 1.0) continue;
    const auto st = g.stencil(x + eps * z);
    double s = 0.0;
    for (std::size_t k = 0; k < st.size; ++k) {
      EXPECT_GT(st.weight[k], 0.0);
      s += st.weight[k];
      EXPECT_NE(g.classify(st.node[k]), NodeClass::exterior);
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
  EXPECT_THROW(g.stencil({5.0, 5.0}), LabError);
}

TEST(GridTest, NodeLookupRoundTrip) {
  const auto g = build_grid(Domain<2>::ball({0.1, 0.0}, 0.7), 0.1, 0.2);
  for (std::size_t f = 0; f < g.size(); f += 7) {
    EXPECT_EQ(g.flat(g.index(f)), f);
    EXPECT_EQ(g.find_node(g.coord(f)), f);
  }
}
