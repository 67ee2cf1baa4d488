#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fracreg/fracreg.hpp"

using namespace fracreg;

namespace {

// (-Delta)^s (1-x^2)_+^s at x = 0 for the kernel 2|x-y|^{-1-2s}, by tanh-sinh quadrature of the
// symmetrized integral over (0,1) plus the exact part over (1, inf).
double explicit_constant_oracle(double s) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [s](double r) {
    if (r < 1e-8) return s * std::pow(r, 1.0 - 2.0 * s);
    return -std::expm1(s * std::log1p(-r * r)) * std::pow(r, -1.0 - 2.0 * s);
  };
  const double I = ts.integrate(f, 0.0, 1.0, 1e-14);
  return 4.0 * (I + 1.0 / (2.0 * s));
}

std::shared_ptr<const Grid<1>> line_grid(double h, int margin = 2) {
  return std::make_shared<const Grid<1>>(Grid<1>::around(Domain<1>::interval(0.0, 1.0), h, margin));
}

std::shared_ptr<const Grid<2>> disc_grid(double h) {
  return std::make_shared<const Grid<2>>(Grid<2>::around(Domain<2>::ball({0.0, 0.0}, 1.0), h));
}

template <int N>
Field<N> random_field(const std::shared_ptr<const Grid<N>>& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return Field<N>::sample(g, [&](const Vec<N>&) { return U(rng); });
}

}  // namespace

TEST(PointwiseFlap, ExplicitProfileMatchesTanhSinh) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  QuadratureScheme q;
  q.rel_tol = 1e-12;
  q.eps = 1e-5;
  for (double s : {0.3, 0.5, 0.7}) {
    const double ours = pointwise_flap<1>(explicit_profile<1>(D, s), Vec<1>{0.0}, 2.0, s, q);
    const double oracle = explicit_constant_oracle(s);
    EXPECT_NEAR(ours / oracle, 1.0, 1e-8) << "s=" << s;
    // closed form of the same constant
    EXPECT_NEAR(oracle, 2.0 * std::numbers::pi / std::sin(std::numbers::pi * s), 1e-9 * oracle);
  }
}

TEST(PointwiseFlap, ExplicitProfileIsConstantInside) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const double s = 0.5, C = 2.0 * std::numbers::pi;
  QuadratureScheme q;
  q.rel_tol = 1e-11;
  for (double x : {-0.6, -0.2, 0.35, 0.8})
    EXPECT_NEAR(pointwise_flap<1>(explicit_profile<1>(D, s), Vec<1>{x}, 2.0, s, q, &D) / C, 1.0, 1e-6) << x;
}

TEST(PointwiseFlap, ExplicitProfileTwoDimensions) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const double s = 0.5;
  QuadratureScheme q;
  q.rel_tol = 1e-9;
  const double C = 2.0 * std::numbers::pi * std::numbers::pi / std::sin(std::numbers::pi * s);
  for (const Vec<2>& x : {Vec<2>{0.0, 0.0}, Vec<2>{0.3, -0.4}})
    EXPECT_NEAR(pointwise_flap<2>(explicit_profile<2>(D, s), x, 2.0, s, q, &D) / C, 1.0, 1e-5);
}

TEST(PointwiseFlap, ConstantGivesZero) {
  const Function<2> c([](const Vec<2>&) { return 3.0; }, {-1.0, -1.0}, {1.0, 1.0});
  QuadratureScheme q;
  q.far_field = false;
  EXPECT_NEAR(pointwise_flap<2>(c, {0.1, 0.2}, 2.5, 0.4, q), 0.0, 1e-12);
  const Function<1> c1([](const Vec<1>&) { return -2.0; }, {-1.0}, {1.0});
  EXPECT_NEAR(pointwise_flap<1>(c1, Vec<1>{0.3}, 3.0, 0.6, q), 0.0, 1e-12);
}

TEST(PointwiseFlap, Homogeneity) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto u = explicit_profile<1>(D, 0.4);
  QuadratureScheme q;
  const double a = pointwise_flap<1>(u, Vec<1>{0.2}, 3.0, 0.4, q);
  const double b = pointwise_flap<1>(u.scaled(2.0), Vec<1>{0.2}, 3.0, 0.4, q);
  EXPECT_NEAR(b / (4.0 * a), 1.0, 1e-12);
  const auto g = line_grid(1.0 / 64);
  const auto f = random_field<1>(g, 5);
  const double fa = pointwise_flap<1>(f, Vec<1>{0.25}, 3.0, 0.4);
  const double fb = pointwise_flap<1>(f.scaled(2.0), Vec<1>{0.25}, 3.0, 0.4);
  EXPECT_NEAR(fb / (4.0 * fa), 1.0, 1e-12);
}

TEST(PointwiseFlap, Preconditions) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto u = explicit_profile<1>(D, 0.5);
  QuadratureScheme q = QuadratureScheme::for_spacing(1.0 / 64);
  EXPECT_THROW(pointwise_flap<1>(u, Vec<1>{0.99}, 2.0, 0.5, q, &D), PreconditionError);
  EXPECT_THROW(pointwise_flap<1>(u, Vec<1>{0.0}, 1.5, 0.5, q), PreconditionError);
  EXPECT_THROW(pointwise_flap<1>(u, Vec<1>{0.0}, 2.0, 1.0, q), PreconditionError);
}

TEST(Energy, ZeroAndHomogeneity) {
  const auto g = disc_grid(1.0 / 16);
  EXPECT_EQ(energy(Field<2>(g), 2.5, 0.5), 0.0);
  const auto u = random_field<2>(g, 9);
  for (double p : {2.0, 3.0, 2.7}) {
    const double J = energy(u, p, 0.45);
    EXPECT_NEAR(energy(u.scaled(3.0), p, 0.45) / (std::pow(3.0, p) * J), 1.0, 1e-12) << p;
  }
}

TEST(Energy, SingleNodeMatchesLatticeZeta) {
  const double h = 1.0 / 128, s = 0.5, p = 2.0, a = 1.0 + p * s;
  const auto g = line_grid(h);
  Field<1> u(g);
  u[g->index(g->nearest(Vec<1>{0.1}))] = 1.0;
  // J = (2/p) h * [h * sum_{k != 0} |kh|^{-a}]
  const double Z = 2.0 * std::pow(h, 1.0 - a) * boost::math::zeta(a);
  EXPECT_NEAR(energy(u, p, s) / ((2.0 / p) * h * Z), 1.0, 1e-4);
}

TEST(Energy, BruteForcePairSum) {
  const double h = 1.0 / 32, s = 0.3, p = 2.6, a = 1.0 + p * s;
  const auto g = line_grid(h);
  const auto u = random_field<1>(g, 21);
  const double Zinf = 2.0 * std::pow(h, 1.0 - a) * boost::math::zeta(a);
  double pairs = 0.0, ext = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (!g->is_interior(i)) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      if (j == i || !g->is_interior(j)) continue;
      const double K = std::pow(std::abs(g->coord(i)[0] - g->coord(j)[0]), -a);
      pairs += h * h * std::pow(std::abs(u[i] - u[j]), p) * K;
      inner += h * K;
    }
    ext += 2.0 * h * std::pow(std::abs(u[i]), p) * (Zinf - inner);
  }
  EXPECT_NEAR(energy(u, p, s) / ((pairs + ext) / p), 1.0, 1e-5);
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  for (double p : {2.0, 2.5, 3.0}) {
    const auto g = disc_grid(1.0 / 8);
    const auto op = PairOperator<2>::on_interior(g, p, 0.6);
    auto x = op.gather(random_field<2>(g, 4));
    std::vector<double> load(x.size(), 0.7), gr(x.size()), tmp(x.size());
    op.objective(x, load, gr);
    const double eps = 1e-6;
    for (std::size_t c = 0; c < x.size(); c += 7) {
      const double x0 = x[c];
      x[c] = x0 + eps;
      const double Fp = op.objective(x, load, tmp);
      x[c] = x0 - eps;
      const double Fm = op.objective(x, load, tmp);
      x[c] = x0;
      EXPECT_NEAR((Fp - Fm) / (2.0 * eps), gr[c], 1e-6 * std::max(1.0, std::abs(gr[c]))) << p << " " << c;
    }
  }
}

TEST(Operator, LinearWhenPIsTwo) {
  const auto g = line_grid(1.0 / 64);
  const auto op = PairOperator<1>::on_interior(g, 2.0, 0.35);
  const auto u = op.gather(random_field<1>(g, 1)), v = op.gather(random_field<1>(g, 2));
  std::vector<double> w(u.size()), Lu(u.size()), Lv(u.size()), Lw(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) w[c] = 2.0 * u[c] - 0.5 * v[c];
  op.flap(u, Lu);
  op.flap(v, Lv);
  op.flap(w, Lw);
  for (std::size_t c = 0; c < u.size(); ++c) EXPECT_NEAR(Lw[c], 2.0 * Lu[c] - 0.5 * Lv[c], 1e-9 * (1 + std::abs(Lw[c])));
}

TEST(Operator, MirrorInvariance) {
  const auto g = line_grid(1.0 / 64);
  const auto u = random_field<1>(g, 3);
  Field<1> m(g);
  const std::size_t n = g->size();
  for (std::size_t i = 0; i < n; ++i) m[i] = u[n - 1 - i];
  for (double p : {2.0, 3.0, 2.3}) {
    const auto op = PairOperator<1>::on_interior(g, p, 0.5);
    std::vector<double> a(op.unknowns()), b(op.unknowns());
    op.flap(op.gather(u), a);
    op.flap(op.gather(m), b);
    const std::size_t k = a.size();
    for (std::size_t c = 0; c < k; ++c) EXPECT_NEAR(a[c], b[k - 1 - c], 1e-10 * (1 + std::abs(a[c])));
  }
}

TEST(Operator, TransposeInvariance) {
  const auto g = disc_grid(1.0 / 12);
  const auto u = random_field<2>(g, 8);
  Field<2> t(g);
  const int n = g->shape()[0];
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) t[g->index({j, i})] = u[g->index({i, j})];
  const auto op = PairOperator<2>::on_interior(g, 2.5, 0.4);
  const auto xu = op.gather(u), xt = op.gather(t);
  for (int j = 0; j < n; j += 3)
    for (int i = 0; i < n; i += 2) {
      const std::size_t a = g->index({i, j}), b = g->index({j, i});
      if (!g->is_interior(a)) continue;
      EXPECT_NEAR(op.flap_at_node(xu, a), op.flap_at_node(xt, b), 1e-10 * (1 + std::abs(op.flap_at_node(xu, a))));
    }
}

TEST(Residual, ZeroForZeroData) {
  const auto g = line_grid(1.0 / 32);
  const auto r = residual(Field<1>(g), Field<1>(g), 3.0, 0.5);
  EXPECT_EQ(r.sup_abs(), 0.0);
}

TEST(Tail, ZeroAndHomogeneity) {
  const auto g = disc_grid(1.0 / 16);
  EXPECT_EQ(tail(Field<2>(g), 1.0, 0.3, {0.9, 0.0}, 0.5).value, 0.0);
  const auto u = random_field<2>(g, 12);
  for (double q : {1.0, 2.0, 1.7}) {
    const double a = tail(u, q, 0.3, {0.9, 0.0}, 0.5).value;
    EXPECT_NEAR(tail(u.scaled(5.0), q, 0.3, {0.9, 0.0}, 0.5).value / (5.0 * a), 1.0, 1e-12);
  }
}

TEST(Tail, ConstantOnDiscMatchesRadialIntegral) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const Function<2> one([D](const Vec<2>& x) { return D.contains(x) ? 1.0 : 0.0; }, {-1.0, -1.0}, {1.0, 1.0}, {D});
  const double ref = 2.0 * std::numbers::pi * (2.0 * std::sqrt(2.0) - 2.0);
  EXPECT_NEAR(tail<2>(one, 1.0, 0.5, {0.0, 0.0}, D, 0.5).value / ref, 1.0, 1e-4);
  const auto g = disc_grid(1.0 / 128);
  const auto u = Field<2>::sample(g, [](const Vec<2>&) { return 1.0; });
  EXPECT_NEAR(tail(u, 1.0, 0.5, {0.0, 0.0}, 0.5).value / ref, 1.0, 2e-2);
}

TEST(Superpose, EqualReplacementHasNoCorrection) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto w = distance_power<1>(D, 0.5);
  QuadratureScheme q;
  const auto r = superpose<1>(w, w, Vec<1>{0.5}, 0.1, Vec<1>{-0.3}, 2.5, 0.5, q, &D);
  EXPECT_EQ(r.correction, 0.0);
  EXPECT_NEAR(r.total, pointwise_flap<1>(w, Vec<1>{-0.3}, 2.5, 0.5, q, &D), 1e-12 * std::abs(r.total));
}

TEST(Superpose, LargerReplacementLowersTheOperator) {
  const auto D = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto w = distance_power<2>(D, 0.4);
  const Function<2> v([w](const Vec<2>& y) { return w(y) + 0.3; }, {-1.0, -1.0}, {1.0, 1.0}, {D});
  QuadratureScheme q;
  for (double p : {2.0, 2.5, 3.0}) {
    const double c = superposition_correction<2>(w, v, {0.5, 0.0}, 0.15, {-0.2, 0.1}, p, 0.4);
    EXPECT_LT(c, 0.0) << p;
  }
}

TEST(Superpose, MatchesDirectMergedEvaluation) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const double s = 0.6;
  const auto w = distance_power<1>(D, s);
  const Function<1> v([w](const Vec<1>& y) { return w(y) - 0.2 + 0.5 * y[0]; }, {-1.0}, {1.0}, {D});
  QuadratureScheme q;
  q.rel_tol = 1e-12;
  for (double p : {2.0, 2.4, 3.0}) {
    const double direct = pointwise_flap<1>(merge<1>(w, v, Vec<1>{0.4}, 0.2), Vec<1>{-0.1}, p, s, q, &D);
    const auto sp = superpose<1>(w, v, Vec<1>{0.4}, 0.2, Vec<1>{-0.1}, p, s, q, &D);
    EXPECT_NEAR(sp.total / direct, 1.0, 1e-8) << p;
  }
}

TEST(Superpose, TouchingSetIsRejected) {
  const auto D = Domain<1>::interval(0.0, 1.0);
  const auto w = distance_power<1>(D, 0.5);
  EXPECT_THROW(superposition_correction<1>(w, w, Vec<1>{0.0}, 0.2, Vec<1>{0.1}, 2.0, 0.5), PreconditionError);
}

TEST(Series, VanishesAsAlphaDecreases) {
  EXPECT_LT(series_S(1.0, 1e-6, 0.5, 10000).value, 1e-4);
  double prev = 1e300;
  for (double a : {0.1, 0.01, 1e-3, 1e-4}) {
    const double v = series_S(2.0, a, 0.5, 10000).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Series, MatchesNaiveSum) {
  const double q = 1.5, a = 0.05, s = 0.4;
  double naive = 0.0;
  for (int j = 1; j <= 400; ++j) naive += std::pow(std::pow(8.0, a * j) - 1.0, q) * std::pow(8.0, -s * j);
  const auto r = series_S(q, a, s, 400);
  EXPECT_NEAR(r.value / naive, 1.0, 1e-12);
  EXPECT_GT(r.remainder_bound, 0.0);
}

TEST(Series, DivergentRegime) {
  EXPECT_THROW(series_S(1.0, 0.5, 0.5, 100), DivergenceError);
  EXPECT_THROW(series_S(2.0, 0.3, 0.5, 100), DivergenceError);
}
