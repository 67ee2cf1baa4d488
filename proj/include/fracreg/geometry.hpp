#pragma once

// Analytic domains with exact distance, metric projection, inner normal and
// interior-sphere radius, plus the normal-ball construction used by the excess.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "fracreg/core.hpp"

namespace fracreg {

enum class DomainKind { interval, ball, stadium, ellipse };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::ball: return "ball";
    case DomainKind::stadium: return "stadium";
    case DomainKind::ellipse: return "ellipse";
  }
  return "?";
}

/// Parameter interval [t0, t1] of a line x + t e lying in the closed domain.
struct LineSection {
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Bounded convex domain with C^{1,1} boundary.
///
/// N = 1: interval (center c, half-length a).
/// N = 2: ball (c, r); stadium (c, half-length a of the flat part along x, cap radius r);
///        axis-aligned ellipse (c, semi-axes a >= b along x and y).
template <int N>
class Domain {
 public:
  static_assert(N == 1 || N == 2, "only N = 1, 2 are supported");
  static constexpr int dimension = N;

  static Domain interval(double center, double half_length) requires(N == 1) {
    if (!(half_length > 0.0)) throw PreconditionError("interval: half-length must be positive");
    Domain d;
    d.kind_ = DomainKind::interval;
    d.center_ = {center};
    d.a_ = half_length;
    return d;
  }

  static Domain ball(Vec<N> center, double radius) requires(N == 2) {
    if (!(radius > 0.0)) throw PreconditionError("ball: radius must be positive");
    Domain d;
    d.kind_ = DomainKind::ball;
    d.center_ = center;
    d.r_ = radius;
    return d;
  }

  static Domain stadium(Vec<N> center, double half_length, double cap_radius) requires(N == 2) {
    if (!(half_length >= 0.0) || !(cap_radius > 0.0))
      throw PreconditionError("stadium: need half_length >= 0 and cap_radius > 0");
    Domain d;
    d.kind_ = DomainKind::stadium;
    d.center_ = center;
    d.a_ = half_length;
    d.r_ = cap_radius;
    return d;
  }

  static Domain ellipse(Vec<N> center, double a, double b) requires(N == 2) {
    if (!(b > 0.0) || !(a >= b)) throw PreconditionError("ellipse: need a >= b > 0");
    if (a / b > 10.0) throw PreconditionError("ellipse: aspect ratio above 10 is not supported");
    Domain d;
    d.kind_ = DomainKind::ellipse;
    d.center_ = center;
    d.a_ = a;
    d.b_ = b;
    return d;
  }

  DomainKind kind() const { return kind_; }
  const Vec<N>& center() const { return center_; }
  static constexpr int dim() { return N; }

  /// Shape parameters in constructor order (excluding the center).
  std::vector<double> params() const {
    switch (kind_) {
      case DomainKind::interval: return {a_};
      case DomainKind::ball: return {r_};
      case DomainKind::stadium: return {a_, r_};
      case DomainKind::ellipse: return {a_, b_};
    }
    return {};
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(center=";
    for (int i = 0; i < N; ++i) os << (i ? "," : "") << center_[i];
    for (double v : params()) os << ";" << v;
    os << ")";
    return os.str();
  }

  Domain translated(const Vec<N>& shift) const {
    Domain d = *this;
    d.center_ = center_ + shift;
    return d;
  }

  /// Open-set membership.
  bool contains(const Vec<N>& x) const { return inner_distance(x) > 0.0; }

  /// d_Omega(x) = dist(x, complement); zero outside.
  double distance(const Vec<N>& x) const { return std::max(0.0, inner_distance(x)); }

  /// Signed distance to the boundary (positive inside).
  double inner_distance(const Vec<N>& x) const {
    const Vec<N> y = x - center_;
    switch (kind_) {
      case DomainKind::interval: return a_ - std::abs(y[0]);
      case DomainKind::ball: return r_ - norm<N>(y);
      case DomainKind::stadium: {
        if constexpr (N == 2) return r_ - std::hypot(y[0] - std::clamp(y[0], -a_, a_), y[1]);
        break;
      }
      case DomainKind::ellipse: {
        if constexpr (N == 2) {
          const Vec<2> q = ellipse_nearest(y);
          const double dd = std::hypot(y[0] - q[0], y[1] - q[1]);
          const double f = (y[0] / a_) * (y[0] / a_) + (y[1] / b_) * (y[1] / b_);
          return f <= 1.0 ? dd : -dd;
        }
        break;
      }
    }
    return 0.0;
  }

  /// rho(Omega): half the largest radius of the balls touching every boundary point from inside.
  double interior_sphere_radius() const {
    switch (kind_) {
      case DomainKind::interval: return 0.5 * a_;
      case DomainKind::ball: return 0.5 * r_;
      case DomainKind::stadium: return 0.5 * r_;
      case DomainKind::ellipse: return 0.5 * std::min(b_, b_ * b_ / a_);
    }
    return 0.0;
  }

  /// Nearest boundary point; defined on {x in closure(Omega) : d(x) < rho}.
  Vec<N> metric_projection(const Vec<N>& x) const {
    const double sd = inner_distance(x);
    const double tol = 1e-14 * scale();
    if (sd < -tol) throw DomainError("metric_projection: point outside the domain");
    if (sd >= interior_sphere_radius())
      throw DomainError("metric_projection: point farther than rho from the boundary");
    const Vec<N> y = x - center_;
    switch (kind_) {
      case DomainKind::interval: return {center_[0] + (y[0] >= 0.0 ? a_ : -a_)};
      case DomainKind::ball: {
        const double n = norm<N>(y);
        return center_ + (r_ / n) * y;
      }
      case DomainKind::stadium: {
        if constexpr (N == 2) {
          const Vec<2> q{std::clamp(y[0], -a_, a_), 0.0};
          const Vec<2> dv = y - q;
          const double n = std::hypot(dv[0], dv[1]);
          return center_ + q + (r_ / n) * dv;
        }
        break;
      }
      case DomainKind::ellipse: {
        if constexpr (N == 2) return center_ + ellipse_nearest(y);
        break;
      }
    }
    return x;
  }

  /// Inner unit normal at a boundary point.
  Vec<N> inner_normal(const Vec<N>& x0) const {
    const Vec<N> y = x0 - center_;
    Vec<N> n{};
    switch (kind_) {
      case DomainKind::interval: n = {y[0] >= 0.0 ? -1.0 : 1.0}; break;
      case DomainKind::ball: n = (-1.0 / norm<N>(y)) * y; break;
      case DomainKind::stadium: {
        if constexpr (N == 2) {
          const Vec<2> q{std::clamp(y[0], -a_, a_), 0.0};
          const Vec<2> dv = q - y;
          n = (1.0 / std::hypot(dv[0], dv[1])) * dv;
        }
        break;
      }
      case DomainKind::ellipse: {
        if constexpr (N == 2) {
          const Vec<2> g{-y[0] / (a_ * a_), -y[1] / (b_ * b_)};
          n = (1.0 / std::hypot(g[0], g[1])) * g;
        }
        break;
      }
    }
    return n;
  }

  /// |boundary equation| at x; zero exactly on the boundary.
  double boundary_residual(const Vec<N>& x) const { return std::abs(inner_distance(x)); }

  /// Boundary point parametrized by t in [0,1) (N = 2), or t < 0.5 -> left end (N = 1).
  Vec<N> boundary_point(double t) const {
    if constexpr (N == 1) {
      return {t < 0.5 ? center_[0] - a_ : center_[0] + a_};
    } else {
      const double th = 2.0 * std::numbers::pi * t;
      switch (kind_) {
        case DomainKind::ball: return center_ + Vec<2>{r_ * std::cos(th), r_ * std::sin(th)};
        case DomainKind::ellipse: return center_ + Vec<2>{a_ * std::cos(th), b_ * std::sin(th)};
        case DomainKind::stadium: {
          // arclength parametrization: bottom flat, right cap, top flat, left cap
          const double L = 4.0 * a_ + 2.0 * std::numbers::pi * r_;
          double sarc = t * L;
          if (sarc < 2.0 * a_) return center_ + Vec<2>{-a_ + sarc, -r_};
          sarc -= 2.0 * a_;
          if (sarc < std::numbers::pi * r_) {
            const double ph = -0.5 * std::numbers::pi + sarc / r_;
            return center_ + Vec<2>{a_ + r_ * std::cos(ph), r_ * std::sin(ph)};
          }
          sarc -= std::numbers::pi * r_;
          if (sarc < 2.0 * a_) return center_ + Vec<2>{a_ - sarc, r_};
          sarc -= 2.0 * a_;
          const double ph = 0.5 * std::numbers::pi + sarc / r_;
          return center_ + Vec<2>{-a_ + r_ * std::cos(ph), r_ * std::sin(ph)};
        }
        default: break;
      }
      return center_;
    }
  }

  /// Axis-aligned bounding box of the closure.
  std::pair<Vec<N>, Vec<N>> bounding_box() const {
    Vec<N> half{};
    if constexpr (N == 1) {
      half[0] = a_;
    } else {
      switch (kind_) {
        case DomainKind::ball: half = {r_, r_}; break;
        case DomainKind::stadium: half = {a_ + r_, r_}; break;
        case DomainKind::ellipse: half = {a_, b_}; break;
        default: break;
      }
    }
    return {center_ - half, center_ + half};
  }

  double diameter() const {
    switch (kind_) {
      case DomainKind::interval: return 2.0 * a_;
      case DomainKind::ball: return 2.0 * r_;
      case DomainKind::stadium: return 2.0 * (a_ + r_);
      case DomainKind::ellipse: return 2.0 * a_;
    }
    return 0.0;
  }

  /// Radius of the largest inscribed ball.
  double inradius() const {
    switch (kind_) {
      case DomainKind::interval: return a_;
      case DomainKind::ball: return r_;
      case DomainKind::stadium: return r_;
      case DomainKind::ellipse: return b_;
    }
    return 0.0;
  }

  /// Section of the line x + t e (|e| = 1) with the closed domain, if nonempty.
  std::optional<LineSection> line_section(const Vec<N>& x, const Vec<N>& e) const {
    const Vec<N> y = x - center_;
    switch (kind_) {
      case DomainKind::interval: {
        const double lo = (-a_ - y[0]) / e[0], hi = (a_ - y[0]) / e[0];
        return LineSection{std::min(lo, hi), std::max(lo, hi)};
      }
      case DomainKind::ball: return disc_section(y, e, {0.0, 0.0}, r_);
      case DomainKind::ellipse: {
        if constexpr (N == 2) {
          const Vec<2> ys{y[0] / a_, y[1] / b_}, es{e[0] / a_, e[1] / b_};
          return quadratic_section(dot<2>(es, es), dot<2>(ys, es), dot<2>(ys, ys) - 1.0);
        }
        break;
      }
      case DomainKind::stadium: {
        if constexpr (N == 2) {
          std::optional<LineSection> acc;
          auto merge = [&](std::optional<LineSection> s) {
            if (!s) return;
            if (!acc) acc = s;
            else acc = LineSection{std::min(acc->t0, s->t0), std::max(acc->t1, s->t1)};
          };
          merge(disc_section(y, e, {-a_, 0.0}, r_));
          merge(disc_section(y, e, {a_, 0.0}, r_));
          merge(box_section(y, e, {-a_, -r_}, {a_, r_}));
          return acc;
        }
        break;
      }
    }
    return std::nullopt;
  }

  /// Distances r > 0 along the ray x + r e where the ray crosses the boundary.
  void ray_crossings(const Vec<N>& x, const Vec<N>& e, std::vector<double>& out) const {
    if (auto s = line_section(x, e)) {
      if (s->t0 > 0.0) out.push_back(s->t0);
      if (s->t1 > 0.0) out.push_back(s->t1);
    }
  }

  /// Segment carrying the ridge (non-smooth set) of the distance function.
  std::pair<Vec<N>, Vec<N>> ridge() const {
    switch (kind_) {
      case DomainKind::stadium:
        if constexpr (N == 2) return {center_ + Vec<2>{-a_, 0.0}, center_ + Vec<2>{a_, 0.0}};
        break;
      case DomainKind::ellipse:
        if constexpr (N == 2) {
          const double f = (a_ * a_ - b_ * b_) / a_;
          return {center_ + Vec<2>{-f, 0.0}, center_ + Vec<2>{f, 0.0}};
        }
        break;
      default: break;
    }
    return {center_, center_};
  }

 private:
  double scale() const { return std::max({a_, r_, b_, 1.0}); }

  static std::optional<LineSection> quadratic_section(double A, double B, double C) {
    // A t^2 + 2 B t + C <= 0
    const double disc = B * B - A * C;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // numerically stable roots
    const double q = -(B + std::copysign(sq, B));
    double t0, t1;
    if (q == 0.0) {
      t0 = t1 = 0.0;
    } else {
      t0 = q / A;
      t1 = C / q;
    }
    if (t0 > t1) std::swap(t0, t1);
    return LineSection{t0, t1};
  }

  static std::optional<LineSection> disc_section(const Vec<N>& y, const Vec<N>& e, Vec<2> c, double r) {
    if constexpr (N == 2) {
      const Vec<2> w = y - c;
      return quadratic_section(dot<2>(e, e), dot<2>(w, e), dot<2>(w, w) - r * r);
    }
    return std::nullopt;
  }

  static std::optional<LineSection> box_section(const Vec<N>& y, const Vec<N>& e, Vec<2> lo, Vec<2> hi) {
    if constexpr (N == 2) {
      double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 2; ++i) {
        if (e[i] == 0.0) {
          if (y[i] < lo[i] || y[i] > hi[i]) return std::nullopt;
          continue;
        }
        double a = (lo[i] - y[i]) / e[i], b = (hi[i] - y[i]) / e[i];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
      }
      if (t0 > t1) return std::nullopt;
      return LineSection{t0, t1};
    }
    return std::nullopt;
  }

  // Nearest point of the centered ellipse to y (any quadrant), by bisection on the
  // Lagrange parameter.
  Vec<2> ellipse_nearest(const Vec<N>& yin) const requires(N == 2) {
    const double sx = yin[0] < 0.0 ? -1.0 : 1.0, sy = yin[1] < 0.0 ? -1.0 : 1.0;
    const double x = std::abs(yin[0]), y = std::abs(yin[1]);
    const double a = a_, b = b_;
    if (y == 0.0) {
      const double f = a * a - b * b;
      if (f > 0.0 && a * x < f) {
        const double qx = a * a * x / f;
        const double qy = b * std::sqrt(std::max(0.0, 1.0 - (qx / a) * (qx / a)));
        return {sx * qx, qy};
      }
      return {sx * a, 0.0};
    }
    if (x == 0.0) return {0.0, sy * b};
    auto F = [&](double t) {
      const double u = a * x / (t + a * a), v = b * y / (t + b * b);
      return u * u + v * v - 1.0;
    };
    double lo = -b * b + b * y;  // F(lo) >= 0
    double hi = std::max(0.0, std::hypot(a * x, b * y));
    if (F(lo) < 0.0) lo = -b * b;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (F(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    return {sx * a * a * x / (t + a * a), sy * b * b * y / (t + b * b)};
  }

  DomainKind kind_ = DomainKind::interval;
  Vec<N> center_{};
  double a_ = 0.0;  // interval half-length, stadium half-length, ellipse x semi-axis
  double r_ = 0.0;  // ball radius, stadium cap radius
  double b_ = 0.0;  // ellipse y semi-axis
};

/// Ball of radius R/4 placed along the inner normal at depth 7R/4 from a boundary point.
template <int N>
struct NormalBall {
  Vec<N> center{};
  double radius = 0.0;
  Vec<N> anchor{};
  double scale = 0.0;

  bool contains(const Vec<N>& y) const { return dist<N>(y, center) < radius; }
};

/// Samples a ball densely (interior polar grid plus the rim); used by post-checks.
template <int N>
std::vector<Vec<N>> sample_ball(const Vec<N>& c, double r, int radial = 48, int angular = 96) {
  std::vector<Vec<N>> pts;
  if constexpr (N == 1) {
    for (int i = 0; i <= 2 * radial; ++i) pts.push_back({c[0] - r + r * i / radial});
  } else {
    pts.push_back(c);
    for (int i = 1; i <= radial; ++i) {
      const double rr = r * i / radial;
      for (int j = 0; j < angular; ++j) {
        const double th = 2.0 * std::numbers::pi * j / angular;
        pts.push_back(c + Vec<2>{rr * std::cos(th), rr * std::sin(th)});
      }
    }
  }
  return pts;
}

/// Builds the normal ball at x0 of scale R and verifies both of its defining properties:
/// containment in D_{2R}(x0) minus D_{3R/2}(x0), and inf of d over it >= 3R/2.
template <int N>
NormalBall<N> normal_ball(const Domain<N>& domain, const std::type_identity_t<Vec<N>>& x0, double R) {
  const double rho = domain.interior_sphere_radius();
  if (!(R > 0.0) || !(R < rho / 4.0))
    throw PreconditionError("normal_ball: need 0 < R < rho/4");
  if (domain.boundary_residual(x0) > 1e-9 * std::max(1.0, domain.diameter()))
    throw PreconditionError("normal_ball: anchor is not a boundary point");
  NormalBall<N> nb;
  nb.anchor = x0;
  nb.scale = R;
  nb.radius = R / 4.0;
  nb.center = x0 + (1.75 * R) * domain.inner_normal(x0);

  const double slack = 1e-12 * R;
  for (const auto& y : sample_ball<N>(nb.center, nb.radius)) {
    const double r = dist<N>(y, x0);
    if (r > 2.0 * R + slack || r < 1.5 * R - slack || domain.inner_distance(y) <= 0.0)
      throw GeometryError("normal_ball: ball not contained in D_{2R} minus D_{3R/2}");
    if (domain.distance(y) < 1.5 * R - slack)
      throw GeometryError("normal_ball: distance to the boundary drops below 3R/2 on the ball");
  }
  return nb;
}

}  // namespace fracreg
