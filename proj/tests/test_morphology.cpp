#include <gtest/gtest.h>

#include <cmath>

#include "fracreg/morphology.hpp"

using namespace fracreg;

namespace {

template <int N>
bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

// Does some lattice disc of radius r inside m contain node i?  Direct search over centers.
bool covered_by_disc(const Grid<2>& g, const Mask& m, std::size_t i, double r) {
  const auto c = g.multi(i);
  const int K = static_cast<int>(std::floor(r / g.h() + 1e-12));
  const double r2 = (r / g.h()) * (r / g.h()) * (1.0 + 1e-12);
  for (int dj = -K; dj <= K; ++dj)
    for (int di = -K; di <= K; ++di) {
      if (double(di) * di + double(dj) * dj > r2) continue;
      const std::array<int, 2> q{c[0] + di, c[1] + dj};
      bool inside = true;
      for (int ej = -K; ej <= K && inside; ++ej)
        for (int ei = -K; ei <= K && inside; ++ei) {
          if (double(ei) * ei + double(ej) * ej > r2) continue;
          const std::array<int, 2> t{q[0] + ei, q[1] + ej};
          inside = g.in_range(t) && m[g.index(t)];
        }
      if (inside) return true;
    }
  return false;
}

}  // namespace

TEST(Opening, BallByQuarterIsTheBall) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = Grid<2>::around(D, 1.0 / 32);
  const auto reg = opened_region<2>(D, ParentSet<2>{}, 0.25, g);
  EXPECT_TRUE(subset<2>(reg.occupancy, reg.parent_mask));
  std::size_t missing = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!reg.parent_mask[i] || reg.occupancy[i]) continue;
    ++missing;
    EXPECT_LT(D.distance(g.coord(i)), 2.0 * g.h());
  }
  EXPECT_LT(missing, mask_count(reg.parent_mask) / 50);
}

TEST(Opening, Idempotent) {
  const auto D = Domain<2>::ellipse({0.0, 0.0}, 1.0, 0.6);
  const auto g = Grid<2>::around(D, 1.0 / 32);
  ParentSet<2> ps;
  ps.center = D.boundary_point(0.0);
  ps.outer = 0.8;
  ps.inner = 0.15;
  const double r = 0.1;
  const auto reg = opened_region<2>(D, ps, r, g);
  EXPECT_EQ(open_mask(g, reg.occupancy, r), reg.occupancy);
}

TEST(Opening, AnnulusInscribedRadius) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = Grid<2>::around(D, 1.0 / 128);
  const double R = 0.2;
  ParentSet<2> ps;
  ps.center = {1.0, 0.0};
  ps.outer = 4.0 * R;
  ps.inner = 0.75 * R;
  const auto reg = opened_region<2>(D, ps, R / 8.0, g);
  ASSERT_GT(mask_count(reg.occupancy), 0u);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (reg.occupancy[i]) {
      EXPECT_TRUE(covered_by_disc(g, reg.parent_mask, i, R / 8.0)) << i;
    }
}

TEST(Opening, BoundaryPatchContainsInnerHalfDisc) {
  // flat-like boundary: the opening of D_R by R/8 keeps every node of D_{3R/4} at depth >= R/4
  const auto D = Domain<2>::ball({0.0, 0.0}, 4.0);
  const auto g = Grid<2>::around(D, 1.0 / 16);
  const double R = 1.0;
  ParentSet<2> ps;
  ps.center = {4.0, 0.0};
  ps.outer = R;
  const auto reg = opened_region<2>(D, ps, R / 8.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.coord(i);
    if (dist<2>(x, ps.center) < 0.75 * R && D.distance(x) >= 0.25 * R) {
      EXPECT_TRUE(reg.occupancy[i]);
    }
  }
}

TEST(Opening, ErodeDilateOrder) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = Grid<1>::around(D, 1.0 / 64);
  const Mask& m = g.interior();
  const auto e = erode(g, m, 0.125);
  const auto d = dilate(g, m, 0.125);
  EXPECT_TRUE(subset<1>(e, m));
  EXPECT_TRUE(subset<1>(m, d));
  EXPECT_EQ(mask_count(m) - mask_count(e), 16u);
}

TEST(Opening, Preconditions) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = Grid<2>::around(D, 1.0 / 16);
  EXPECT_THROW(opened_region<2>(D, ParentSet<2>{}, 0.05, g), PreconditionError);
  ParentSet<2> tiny;
  tiny.center = {1.0, 0.0};
  tiny.outer = 0.2;
  EXPECT_THROW(opened_region<2>(D, tiny, 0.5, g), GeometryError);
}
