#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fracreg/fracreg.hpp"

using namespace fracreg;

namespace {

template <int N>
std::shared_ptr<const Grid<N>> make_grid(const Domain<N>& D, double h) {
  return std::make_shared<const Grid<N>>(Grid<N>::around(D, h));
}

}  // namespace

TEST(Quotient, DistancePowerIsOne) {
  const auto D = Domain<2>::ellipse({0.0, 0.0}, 1.0, 0.6);
  const auto g = make_grid<2>(D, 1.0 / 32);
  const double s = 0.35;
  const auto u = Field<2>::sample(g, [&](const Vec<2>& x) { return std::pow(D.distance(x), s); });
  const auto v = quotient(u, D, s);
  std::size_t inc = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (!v.included[i]) continue;
    ++inc;
    EXPECT_NEAR(v.values[i], 1.0, 1e-12);
    EXPECT_GE(D.distance(g->coord(i)), v.h_cut);
  }
  EXPECT_GT(inc, 0u);
  EXPECT_NEAR(v.sup_abs, 1.0, 1e-12);
  for (std::size_t i = 0; i < g->size(); ++i) {
    EXPECT_FALSE(v.included[i] && v.excluded[i]);
    if (g->is_interior(i)) {
      EXPECT_TRUE(v.included[i] || v.excluded[i]);
    }
  }
}

TEST(Quotient, ScalesWithTheField) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 64);
  const auto u = Field<1>::sample(g, [](const Vec<1>& x) { return std::cos(x[0]); });
  const auto a = quotient(u, D, 0.5), b = quotient(u.scaled(3.0), D, 0.5);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(b.values[i], 3.0 * a.values[i], 1e-14);
  EXPECT_NEAR(b.sup_abs, 3.0 * a.sup_abs, 1e-14);
}

TEST(Quotient, RejectsFreeFields) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 16);
  const auto u = Field<1>::sample(g, [](const Vec<1>&) { return 1.0; }, FieldKind::free);
  EXPECT_THROW(quotient(u, D, 0.5), ContractError);
}

TEST(Excess, MultiplesOfDistancePower) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = make_grid<2>(D, 1.0 / 128);
  const double s = 0.5, k = 0.7;
  const auto u = Field<2>::sample(g, [&](const Vec<2>& x) { return k * std::pow(D.distance(x), s); });
  const Vec<2> x0{1.0, 0.0};
  const auto e0 = excess<2>(u, k, 0.1, x0, D, s);
  EXPECT_NEAR(e0.value, 0.0, 1e-12);
  EXPECT_GE(e0.nodes, kNodeFloor);
  for (double c : {-0.3, 0.25}) EXPECT_NEAR(excess<2>(u, k + c, 0.1, x0, D, s).value, std::abs(c), 1e-12);
}

TEST(Excess, MatchesMonteCarloAverage) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = make_grid<2>(D, 1.0 / 256);
  const double s = 0.4, R = 0.1;
  auto w = [](const Vec<2>& x) { return 1.0 + 2.0 * x[0] - x[1] * x[1]; };
  const auto u = Field<2>::sample(g, [&](const Vec<2>& x) { return std::pow(D.distance(x), s) * w(x); });
  const Vec<2> x0 = D.boundary_point(0.1);
  const double k = 2.5;
  const auto ex = excess<2>(u, k, R, x0, D, s);

  const auto nb = normal_ball<2>(D, x0, R);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double acc = 0.0;
  int n = 0;
  while (n < 400000) {
    const Vec<2> y{nb.center[0] + nb.radius * U(rng), nb.center[1] + nb.radius * U(rng)};
    if (!nb.contains(y)) continue;
    acc += std::abs(w(y) - k);
    ++n;
  }
  const double mc = acc / n;
  EXPECT_NEAR(ex.value, mc, 0.01 * mc);
}

TEST(Excess, TooFewNodes) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = make_grid<2>(D, 1.0 / 16);
  const auto u = Field<2>::sample(g, [](const Vec<2>&) { return 1.0; });
  EXPECT_THROW(excess<2>(u, 0.0, 0.1, Vec<2>{1.0, 0.0}, D, 0.5), ResolutionError);
}

TEST(Oscillation, MonotoneInRadius) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto g = make_grid<2>(D, 1.0 / 128);
  const auto u = Field<2>::sample(g, [](const Vec<2>& x) { return std::sin(3.0 * x[0]) + x[1]; });
  const auto v = quotient(u, D, 0.5);
  const Vec<2> x1{0.0, -1.0};
  double prev = oscillation<2>(v, x1, 1.0);
  for (int k = 1; k < 5; ++k) {
    const double o = oscillation<2>(v, x1, level_radius(1.0, k));
    EXPECT_LE(o, prev);
    prev = o;
  }
  EXPECT_THROW(oscillation<2>(v, x1, 2.0 / 128), ResolutionError);
}

TEST(Fit, LeastSquaresLine) {
  const auto f = least_squares({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(Fit, RecoversKnownExponent) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 2048);
  const Vec<1> x1{-1.0};
  for (double beta : {0.3, 0.6}) {
    const auto u = Field<1>::sample(g, [&](const Vec<1>& x) {
      return std::sqrt(D.distance(x)) * (1.0 + std::pow(std::abs(x[0] + 1.0), beta));
    });
    const auto v = quotient(u, D, 0.5);
    const int L = usable_levels<1>(v, x1, 1.0);
    ASSERT_GE(L, 3);
    const auto tr = holder_fit<1>(v, x1, 1.0, L);
    EXPECT_NEAR(tr.alpha, beta, 0.02);
    EXPECT_TRUE(tr.monotone);
    EXPECT_EQ(tr.radii.size(), static_cast<std::size_t>(L));
    EXPECT_GT(tr.C, 0.0);
  }
}

TEST(Fit, NeedsThreeLevels) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 256);
  const auto v = quotient(Field<1>::sample(g, [](const Vec<1>& x) { return x[0]; }), D, 0.5);
  EXPECT_THROW(holder_fit<1>(v, Vec<1>{-1.0}, 1.0, 2), PreconditionError);
}

TEST(Anchors, OnTheBoundary) {
  const auto D = Domain<2>::stadium({0.0, 0.0}, 0.5, 0.4);
  const auto a = boundary_anchors<2>(D, 5);
  ASSERT_EQ(a.size(), 5u);
  for (const auto& x : a) EXPECT_NEAR(D.distance(x), 0.0, 1e-12);
  EXPECT_EQ(boundary_anchors<1>(Domain<1>::interval(0.0, 1.0), 4).size(), 2u);
}

TEST(Report, ZeroLoad) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 256);
  SolverConfig cfg;
  cfg.p = 2.5;
  cfg.s = 0.5;
  ReportOptions opt;
  opt.rerun = false;
  const auto rep = theorem_main_report<1>(D, [](const Vec<1>&) { return 0.0; }, cfg, g, opt);
  EXPECT_EQ(rep.sup_quotient, 0.0);
  for (const auto& e : rep.excess) EXPECT_EQ(e.value, 0.0);
}

TEST(Report, TorsionChecksPass) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 512);
  SolverConfig cfg;
  cfg.p = 2.0;
  cfg.s = 0.5;
  cfg.tol = 1e-11;
  const auto rep = theorem_main_report<1>(D, [](const Vec<1>&) { return 1.0; }, cfg, g);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value;
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.anchors.size(), 2u);
  EXPECT_GT(rep.sup_quotient, 0.0);
  EXPECT_FALSE(rep.tails.empty());
  EXPECT_EQ(rep.version, kVersion);
}

TEST(Harnack, Fields) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto g = make_grid<1>(D, 1.0 / 512);
  const double s = 0.5;
  const auto u = Field<1>::sample(g, [&](const Vec<1>& x) { return std::pow(D.distance(x), s) * (2.0 + x[0]); });
  const Vec<1> x0{-1.0};
  const auto lo = harnack_report<1>(u, 0.5, false, 0.1, x0, D, 2.5, s);
  EXPECT_GT(lo.inf_gap, 0.0);
  EXPECT_GT(lo.excess, 0.0);
  EXPECT_NEAR(lo.ratio, lo.inf_gap / lo.excess, 1e-15);
  EXPECT_GT(lo.nodes, 0u);
  EXPECT_GT(lo.sup_u, 0.0);
  EXPECT_TRUE(std::isfinite(lo.tail1));
  EXPECT_TRUE(std::isfinite(lo.tail_pm1));
  const auto hi = harnack_report<1>(u, 3.5, true, 0.1, x0, D, 2.5, s);
  EXPECT_TRUE(hi.upper);
  EXPECT_GT(hi.inf_gap, 0.0);
}
