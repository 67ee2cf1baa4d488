#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature with user breakpoints.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "fracreg/core.hpp"

namespace fracreg::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = true;
};

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 2000;
};

namespace detail {

// Kronrod nodes on [-1,1] (nonnegative half) and weights; every other node is Gauss.
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWk[7];
  double rg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = hl * kXk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    rk += kWk[j] * (f1 + f2);
    if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
  }
  const double value = rk * hl;
  const double error = std::abs((rk - rg) * hl);
  return {a, b, value, std::isfinite(error) ? error : 1e300};
}

}  // namespace detail

/// Integrates f over [a,b]; `breaks` (any order, out-of-range ignored) seed the partition.
template <class F>
Result integrate(F&& f, double a, double b, std::vector<double> breaks = {}, Options opt = {}) {
  Result res;
  if (!(b > a)) return res;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b && x - pts.back() > 1e-15 * (std::abs(x) + 1.0)) pts.push_back(x);
  pts.push_back(b);

  std::priority_queue<detail::Segment> heap;
  CompensatedSum total;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gk15(f, pts[i], pts[i + 1]);
    heap.push(s);
  }
  auto recompute = [&]() {
    // Totals are re-accumulated from the heap to avoid drift.
    auto copy = heap;
    CompensatedSum v;
    double e = 0.0;
    while (!copy.empty()) {
      v.add(copy.top().value);
      e += copy.top().error;
      copy.pop();
    }
    total = v;
    err = e;
  };
  recompute();
  int n = static_cast<int>(heap.size());
  int since_recompute = 0;
  double running_value = total.value();
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(running_value))) {
    if (n >= opt.max_intervals) {
      res.converged = false;
      break;
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted at machine precision
      heap.push({worst.a, worst.b, worst.value, 0.0});
      recompute();
      running_value = total.value();
      continue;
    }
    auto l = detail::gk15(f, worst.a, mid);
    auto r = detail::gk15(f, mid, worst.b);
    heap.push(l);
    heap.push(r);
    err += l.error + r.error - worst.error;
    running_value += l.value + r.value - worst.value;
    ++n;
    if (++since_recompute == 64) {
      since_recompute = 0;
      recompute();
      running_value = total.value();
    }
  }
  recompute();
  res.value = total.value();
  res.error = err;
  res.intervals = n;
  return res;
}

/// Log-spaced breakpoints between lo>0 and hi, useful when the integrand is a power near lo.
inline std::vector<double> geometric_breaks(double lo, double hi, double ratio = 4.0) {
  std::vector<double> out;
  if (!(lo > 0.0) || !(hi > lo)) return out;
  for (double x = lo * ratio; x < hi; x *= ratio) out.push_back(x);
  return out;
}

}  // namespace fracreg::quad
