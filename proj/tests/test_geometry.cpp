#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fracreg/geometry.hpp"

using namespace fracreg;

namespace {

std::vector<Vec<2>> dense_boundary(const Domain<2>& D, int n = 200000) {
  std::vector<Vec<2>> pts(n);
  for (int k = 0; k < n; ++k) pts[k] = D.boundary_point(double(k) / n);
  return pts;
}

double brute_distance(const std::vector<Vec<2>>& bd, const Vec<2>& x, Vec<2>* arg = nullptr) {
  double m = 1e300;
  for (const auto& b : bd) {
    const double d = dist<2>(x, b);
    if (d < m) {
      m = d;
      if (arg) *arg = b;
    }
  }
  return m;
}

std::vector<Domain<2>> shapes() {
  return {Domain<2>::ball({0.0, 0.0}, 1.0), Domain<2>::ball({0.3, -0.2}, 0.7),
          Domain<2>::stadium({0.0, 0.0}, 1.0, 0.5), Domain<2>::ellipse({0.0, 0.0}, 2.0, 1.0),
          Domain<2>::ellipse({0.1, 0.1}, 1.0, 0.4)};
}

}  // namespace

TEST(Distance, BallCenter) { EXPECT_DOUBLE_EQ(Domain<2>::ball({0.0, 0.0}, 1.0).distance({0.0, 0.0}), 1.0); }

TEST(Distance, BoundaryPointsAreZero) {
  for (const auto& D : shapes())
    for (double t : {0.0, 0.13, 0.5, 0.77}) EXPECT_NEAR(D.distance(D.boundary_point(t)), 0.0, 1e-12) << D.describe();
  const auto I = Domain<1>::interval(0.0, 1.0);
  EXPECT_EQ(I.distance({1.0}), 0.0);
  EXPECT_EQ(I.distance({-1.0}), 0.0);
}

TEST(Distance, StadiumCenterIsCapRadius) {
  const auto D = Domain<2>::stadium({0.0, 0.0}, 1.5, 0.4);
  EXPECT_DOUBLE_EQ(D.distance({0.0, 0.0}), 0.4);
  EXPECT_NEAR(D.distance({0.0, 0.0}), brute_distance(dense_boundary(D), {0.0, 0.0}), 1e-8);
}

TEST(Distance, ZeroOutside) {
  for (const auto& D : shapes()) EXPECT_EQ(D.distance({5.0, 5.0}), 0.0);
  EXPECT_EQ(Domain<1>::interval(0.0, 1.0).distance({1.5}), 0.0);
}

TEST(Distance, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.2, 2.2);
  for (const auto& D : shapes()) {
    const auto bd = dense_boundary(D);
    int tested = 0;
    while (tested < 40) {
      const Vec<2> x{U(rng), U(rng)};
      if (!D.contains(x)) continue;
      ++tested;
      EXPECT_NEAR(D.distance(x), brute_distance(bd, x), 1e-6) << D.describe();
    }
  }
}

TEST(Distance, OneLipschitz) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.5, 2.5);
  for (const auto& D : shapes())
    for (int k = 0; k < 2000; ++k) {
      const Vec<2> x{U(rng), U(rng)}, y{U(rng), U(rng)};
      EXPECT_LE(std::abs(D.distance(x) - D.distance(y)), dist<2>(x, y) * (1.0 + 1e-12) + 1e-14);
    }
}

TEST(Projection, Examples) {
  const auto B = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto p = B.metric_projection({0.7, 0.0});
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
  const auto I = Domain<1>::interval(0.0, 1.0);
  EXPECT_EQ(I.metric_projection({0.9})[0], 1.0);
  EXPECT_EQ(I.metric_projection({-0.6})[0], -1.0);
}

TEST(Projection, DistanceIsDistanceToProjection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.2, 2.2);
  for (const auto& D : shapes()) {
    const double rho = D.interior_sphere_radius();
    int tested = 0;
    while (tested < 100) {
      const Vec<2> x{U(rng), U(rng)};
      if (!D.contains(x) || D.distance(x) >= rho) continue;
      ++tested;
      const auto y = D.metric_projection(x);
      EXPECT_NEAR(D.boundary_residual(y), 0.0, 1e-10) << D.describe();
      EXPECT_NEAR(dist<2>(x, y), D.distance(x), 1e-10) << D.describe();
    }
  }
}

TEST(Projection, EllipseNearFlatSideMatchesArgmin) {
  const auto D = Domain<2>::ellipse({0.0, 0.0}, 2.0, 1.0);
  const auto bd = dense_boundary(D);
  for (const Vec<2>& x : {Vec<2>{0.1, 0.85}, Vec<2>{-0.4, -0.9}, Vec<2>{0.7, 0.8}}) {
    Vec<2> arg{};
    brute_distance(bd, x, &arg);
    const auto y = D.metric_projection(x);
    EXPECT_NEAR(y[0], arg[0], 1e-4);
    EXPECT_NEAR(y[1], arg[1], 1e-4);
  }
}

TEST(Projection, FarPointsAreRejected) {
  const auto B = Domain<2>::ball({0.0, 0.0}, 1.0);
  EXPECT_THROW(B.metric_projection({0.0, 0.0}), DomainError);
  EXPECT_THROW(B.metric_projection({2.0, 0.0}), DomainError);
}

TEST(InteriorSphereRadius, ClosedForms) {
  EXPECT_DOUBLE_EQ(Domain<2>::ball({0.0, 0.0}, 1.0).interior_sphere_radius(), 0.5);
  EXPECT_DOUBLE_EQ(Domain<1>::interval(0.0, 1.0).interior_sphere_radius(), 0.5);
  EXPECT_DOUBLE_EQ(Domain<2>::ellipse({0.0, 0.0}, 2.0, 1.0).interior_sphere_radius(), 0.25);
  EXPECT_DOUBLE_EQ(Domain<2>::stadium({0.0, 0.0}, 1.0, 0.6).interior_sphere_radius(), 0.3);
}

TEST(InteriorSphereRadius, EllipseTangentBallBruteForce) {
  // largest ball tangent from inside at every boundary point: min over the boundary of the
  // distance-to-boundary of the point at depth R along the normal must equal R
  const auto D = Domain<2>::ellipse({0.0, 0.0}, 2.0, 1.0);
  auto fits = [&](double R) {
    for (int k = 0; k < 720; ++k) {
      const auto x0 = D.boundary_point(k / 720.0);
      const auto c = x0 + R * D.inner_normal(x0);
      if (D.distance(c) < R * (1.0 - 1e-14)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double m = 0.5 * (lo + hi);
    (fits(m) ? lo : hi) = m;
  }
  EXPECT_NEAR(lo, 0.5, 1e-6);
  EXPECT_NEAR(0.5 * lo, D.interior_sphere_radius(), 1e-6);
}

TEST(NormalBall, Examples) {
  const auto B = Domain<2>::ball({0.0, 0.0}, 1.0);
  const auto nb = normal_ball<2>(B, {1.0, 0.0}, 0.1);
  EXPECT_NEAR(nb.center[0], 0.825, 1e-15);
  EXPECT_NEAR(nb.center[1], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(nb.radius, 0.025);
  const auto I = Domain<1>::interval(0.0, 1.0);
  EXPECT_NEAR(normal_ball<1>(I, {-1.0}, 0.05).center[0], -0.9125, 1e-15);
}

TEST(NormalBall, InvariantsOnEveryShape) {
  for (const auto& D : shapes()) {
    const double R = 0.9 * D.interior_sphere_radius() / 4.0;
    for (double t : {0.0, 0.1, 0.37, 0.75}) {
      const auto x0 = D.boundary_point(t);
      const auto nb = normal_ball<2>(D, x0, R);
      for (const auto& y : sample_ball<2>(nb.center, nb.radius, 12, 24)) {
        const double r = dist<2>(y, x0);
        EXPECT_LE(r, 2.0 * R * (1 + 1e-12));
        EXPECT_GE(r, 1.5 * R * (1 - 1e-12));
        EXPECT_GE(D.distance(y), 1.5 * R * (1 - 1e-12));
      }
    }
  }
}

TEST(NormalBall, Preconditions) {
  const auto B = Domain<2>::ball({0.0, 0.0}, 1.0);
  EXPECT_THROW(normal_ball<2>(B, {1.0, 0.0}, 0.2), PreconditionError);
  EXPECT_THROW(normal_ball<2>(B, {0.5, 0.0}, 0.1), PreconditionError);
}

TEST(Domain, InnerNormalPointsInward) {
  for (const auto& D : shapes())
    for (double t : {0.0, 0.2, 0.45, 0.9}) {
      const auto x0 = D.boundary_point(t);
      const auto n = D.inner_normal(x0);
      EXPECT_NEAR(norm<2>(n), 1.0, 1e-14);
      EXPECT_TRUE(D.contains(x0 + 1e-3 * n));
      EXPECT_NEAR(D.distance(x0 + 1e-3 * n), 1e-3, 1e-8);
    }
}

TEST(Domain, TranslationShiftsDistance) {
  const auto D = Domain<2>::ellipse({0.0, 0.0}, 1.5, 1.0);
  const Vec<2> c{0.4, -1.1};
  const auto T = D.translated(c);
  for (const Vec<2>& x : {Vec<2>{0.2, 0.3}, Vec<2>{-1.0, 0.1}, Vec<2>{3.0, 0.0}})
    EXPECT_NEAR(T.distance(x + c), D.distance(x), 1e-14);
}

TEST(Domain, InvalidShapes) {
  EXPECT_THROW(Domain<2>::ball({0.0, 0.0}, -1.0), PreconditionError);
  EXPECT_THROW(Domain<2>::ellipse({0.0, 0.0}, 1.0, 2.0), PreconditionError);
  EXPECT_THROW(Domain<1>::interval(0.0, 0.0), PreconditionError);
}
