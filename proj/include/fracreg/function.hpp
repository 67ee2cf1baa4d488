#pragma once

// Closed-form functions on R^N with the break information that the singular
// quadrature needs (where a ray crosses an interface, where the angular
// integrand has kinks).

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/geometry.hpp"

namespace fracreg {

template <int N>
class Function {
 public:
  using Eval = std::function<double(const Vec<N>&)>;

  Function() = default;
  /// f must vanish outside the box [lo, hi]; interfaces are sets across which f may be non-smooth.
  Function(Eval f, Vec<N> lo, Vec<N> hi, std::vector<Domain<N>> interfaces = {})
      : f_(std::make_shared<Eval>(std::move(f))), lo_(lo), hi_(hi), interfaces_(std::move(interfaces)) {}

  double operator()(const Vec<N>& x) const { return (*f_)(x); }
  explicit operator bool() const { return static_cast<bool>(f_); }

  const Vec<N>& support_lo() const { return lo_; }
  const Vec<N>& support_hi() const { return hi_; }
  const std::vector<Domain<N>>& interfaces() const { return interfaces_; }

  double support_diameter() const { return norm<N>(hi_ - lo_); }
  /// Largest distance from x to the support box.
  double support_reach(const Vec<N>& x) const {
    double s2 = 0.0;
    for (int k = 0; k < N; ++k) {
      const double d = std::max(std::abs(x[k] - lo_[k]), std::abs(x[k] - hi_[k]));
      s2 += d * d;
    }
    return std::sqrt(s2);
  }

  Function scaled(double t) const {
    auto f = f_;
    return Function([f, t](const Vec<N>& x) { return t * (*f)(x); }, lo_, hi_, interfaces_);
  }

  /// Distances r > 0 such that x + r e or x - r e meets an interface boundary or ridge.
  void ray_breaks(const Vec<N>& x, const Vec<N>& e, double rmax, std::vector<double>& out) const {
    for (const auto& D : interfaces_) {
      if (auto sec = D.line_section(x, e)) {
        for (double t : {sec->t0, sec->t1}) {
          const double r = std::abs(t);
          if (r > 0.0 && r < rmax) out.push_back(r);
        }
      }
      auto [a, b] = D.ridge();
      const double t = ridge_parameter(x, e, a, b);
      if (std::isfinite(t) && std::abs(t) > 0.0 && std::abs(t) < rmax) out.push_back(std::abs(t));
    }
  }

  /// Angles in [0, pi) where the radial integral is not smooth in the direction angle.
  void angle_breaks(const Vec<N>& x, std::vector<double>& out) const {
    if constexpr (N == 2) {
      auto push = [&](double th) {
        th = std::fmod(th, std::numbers::pi);
        if (th < 0.0) th += std::numbers::pi;
        out.push_back(th);
      };
      for (const auto& D : interfaces_) {
        if (D.kind() == DomainKind::ball && !D.contains(x)) {
          const Vec<2> c = D.center() - x;
          const double dc = std::hypot(c[0], c[1]);
          const double r = D.params()[0];
          const double base = std::atan2(c[1], c[0]);
          if (dc > r) {
            const double half = std::asin(std::min(1.0, r / dc));
            push(base - half);
            push(base + half);
          }
          push(base);
        }
        auto [a, b] = D.ridge();
        for (const auto& q : {a, b}) {
          const Vec<2> d = q - x;
          if (std::hypot(d[0], d[1]) > 0.0) push(std::atan2(d[1], d[0]));
        }
      }
    }
  }

 private:
  // Line parameter t at which x + t e meets the segment [a, b] (closest approach for a point).
  static double ridge_parameter(const Vec<N>& x, const Vec<N>& e, const Vec<N>& a, const Vec<N>& b) {
    if constexpr (N == 1) {
      return (a[0] - x[0]) / e[0];
    } else {
      const Vec<2> ab = b - a;
      const double len = std::hypot(ab[0], ab[1]);
      if (len == 0.0) return dot<2>(a - x, e);
      // solve x + t e = a + u ab
      const double det = e[0] * (-ab[1]) - e[1] * (-ab[0]);
      if (std::abs(det) < 1e-14 * len) return std::numeric_limits<double>::quiet_NaN();
      const Vec<2> rhs = a - x;
      const double t = (rhs[0] * (-ab[1]) - rhs[1] * (-ab[0])) / det;
      const double u = (e[0] * rhs[1] - e[1] * rhs[0]) / det;
      if (u < 0.0 || u > 1.0) return std::numeric_limits<double>::quiet_NaN();
      return t;
    }
  }

  std::shared_ptr<Eval> f_;
  Vec<N> lo_{};
  Vec<N> hi_{};
  std::vector<Domain<N>> interfaces_;
};

/// d_Omega(x)^s.
template <int N>
Function<N> distance_power(const Domain<N>& domain, double s) {
  auto [lo, hi] = domain.bounding_box();
  return Function<N>([domain, s](const Vec<N>& x) { return std::pow(domain.distance(x), s); }, lo, hi,
                     {domain});
}

/// (r^2 - |x - c|^2)_+^s on the ball / interval of radius r; for r = 1 this is (1 - |x|^2)_+^s.
template <int N>
Function<N> explicit_profile(const Domain<N>& domain, double s) {
  if (domain.kind() != DomainKind::ball && domain.kind() != DomainKind::interval)
    throw PreconditionError("explicit_profile: needs a ball or an interval");
  const double r = domain.params()[0];
  const Vec<N> c = domain.center();
  auto [lo, hi] = domain.bounding_box();
  return Function<N>(
      [c, r, s](const Vec<N>& x) {
        const Vec<N> y = x - c;
        const double t = r * r - dot<N>(y, y);
        return t > 0.0 ? std::pow(t, s) : 0.0;
      },
      lo, hi, {domain});
}

/// Ball of radius r around c as a Domain<N> (interval when N = 1).
template <int N>
Domain<N> ball_domain(const Vec<N>& c, double r) {
  if constexpr (N == 1) return Domain<1>::interval(c[0], r);
  else return Domain<2>::ball(c, r);
}

/// w outside the ball V, v inside.
template <int N>
Function<N> merge(const Function<N>& w, const Function<N>& v, const Vec<N>& vc, double vr) {
  Vec<N> lo{}, hi{};
  for (int k = 0; k < N; ++k) {
    lo[k] = std::min({w.support_lo()[k], v.support_lo()[k], vc[k] - vr});
    hi[k] = std::max({w.support_hi()[k], v.support_hi()[k], vc[k] + vr});
  }
  auto ifs = w.interfaces();
  ifs.push_back(ball_domain<N>(vc, vr));
  for (const auto& d : v.interfaces()) ifs.push_back(d);
  return Function<N>(
      [w, v, vc, vr](const Vec<N>& x) { return dist<N>(x, vc) < vr ? v(x) : w(x); }, lo, hi, std::move(ifs));
}

}  // namespace fracreg
