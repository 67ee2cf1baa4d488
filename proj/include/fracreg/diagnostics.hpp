#pragma once

// Boundary-regularity measurements on solver output: the quotient u/d^s, nonlocal
// excess, oscillation decay over shrinking balls, and exponent fits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/operator.hpp"
#include "fracreg/solver.hpp"

namespace fracreg {

inline constexpr std::size_t kNodeFloor = 20;

template <int N>
std::vector<double> to_vector(const Vec<N>& x) {
  return std::vector<double>(x.begin(), x.end());
}

template <int N>
struct QuotientField {
  std::shared_ptr<const Grid<N>> grid;
  std::vector<double> values;  // u/d^s at included nodes, 0 elsewhere
  Mask included;               // interior nodes with d >= h_cut
  Mask excluded;               // interior nodes with d < h_cut
  double h_cut = 0.0;
  double sup_abs = 0.0;
};

template <int N>
QuotientField<N> quotient(const Field<N>& u, const Domain<N>& domain, double s) {
  if (u.kind() != FieldKind::dirichlet) throw ContractError("quotient: field must be of dirichlet kind");
  const Grid<N>& g = u.grid();
  QuotientField<N> q;
  q.grid = u.grid_ptr();
  q.h_cut = g.h();
  q.values.assign(g.size(), 0.0);
  q.included.assign(g.size(), 0);
  q.excluded.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i)) continue;
    const double d = domain.distance(g.coord(i));
    if (d < q.h_cut) {
      q.excluded[i] = 1;
      continue;
    }
    q.included[i] = 1;
    q.values[i] = u[i] / std::pow(d, s);
    if (!std::isfinite(q.values[i])) throw NumericError("quotient: non-finite value");
    q.sup_abs = std::max(q.sup_abs, std::abs(q.values[i]));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Excess

struct ExcessValue {
  double k = 0.0;
  double R = 0.0;
  std::vector<double> x0;
  double value = 0.0;
  std::size_t nodes = 0;
};

/// Mean of |v - k| over the grid nodes of the normal ball at x0 of scale R.
template <int N>
ExcessValue excess(const QuotientField<N>& v, double k, double R, const std::type_identity_t<Vec<N>>& x0,
                   const Domain<N>& domain) {
  const NormalBall<N> nb = normal_ball<N>(domain, x0, R);
  const Grid<N>& g = *v.grid;
  CompensatedSum acc;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!v.included[i] || !nb.contains(g.coord(i))) continue;
    acc.add(std::abs(v.values[i] - k));
    ++n;
  }
  if (n < kNodeFloor) throw ResolutionError("excess: fewer than 20 nodes in the normal ball");
  return {k, R, to_vector<N>(x0), acc.value() / static_cast<double>(n), n};
}

template <int N>
ExcessValue excess(const Field<N>& u, double k, double R, const std::type_identity_t<Vec<N>>& x0,
                   const Domain<N>& domain, double s) {
  return excess<N>(quotient(u, domain, s), k, R, x0, domain);
}

// ---------------------------------------------------------------------------
// Oscillation and exponent fits

template <int N>
std::size_t nodes_within(const QuotientField<N>& v, const std::type_identity_t<Vec<N>>& x1, double r) {
  const Grid<N>& g = *v.grid;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (v.included[i] && dist<N>(g.coord(i), x1) < r) ++n;
  return n;
}

/// max - min of v over included nodes of D_r(x1).
template <int N>
double oscillation(const QuotientField<N>& v, const std::type_identity_t<Vec<N>>& x1, double r) {
  const Grid<N>& g = *v.grid;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!v.included[i] || !(dist<N>(g.coord(i), x1) < r)) continue;
    lo = std::min(lo, v.values[i]);
    hi = std::max(hi, v.values[i]);
    ++n;
  }
  if (n < kNodeFloor) throw ResolutionError("oscillation: fewer than 20 included nodes in D_r");
  return hi - lo;
}

/// Ratio between consecutive radii; three steps make one factor 8.
inline double level_ratio() { return 0.5; }

inline double level_radius(double R0, int k) { return R0 * std::pow(level_ratio(), k); }

struct OscillationTrace {
  std::vector<double> anchor;
  std::vector<double> radii;
  std::vector<double> osc;
  std::vector<bool> used;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double alpha_plain = std::numeric_limits<double>::quiet_NaN();
  double C_plain = std::numeric_limits<double>::quiet_NaN();
  bool monotone = true;
};

struct LineFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

/// Number of levels R0 / 2^k whose ball holds at least the node floor.
template <int N>
int usable_levels(const QuotientField<N>& v, const std::type_identity_t<Vec<N>>& x1, double R0, int cap = 12) {
  int k = 0;
  while (k < cap && nodes_within<N>(v, x1, level_radius(R0, k)) >= kNodeFloor) ++k;
  return k;
}

/// Oscillation over D_{R_k}(x1), R_k = R0 / 2^k, k < n_levels.  The exponent comes
/// from the successive differences osc_k - osc_{k+1} ~ C (1 - 2^-alpha) R_k^alpha,
/// which removes the constant offset left by the excluded boundary layer; the plain
/// fit of log osc against log r is reported alongside.  Levels with osc below
/// noise_floor are dropped.
template <int N>
OscillationTrace holder_fit(const QuotientField<N>& v, const std::type_identity_t<Vec<N>>& x1, double R0,
                            int n_levels, double noise_floor = 0.0) {
  if (n_levels < 3) throw PreconditionError("holder_fit: need at least 3 levels");
  if (!(R0 > 0.0)) throw PreconditionError("holder_fit: R0 must be positive");
  OscillationTrace tr;
  tr.anchor = to_vector<N>(x1);
  for (int k = 0; k < n_levels; ++k) {
    const double r = level_radius(R0, k);
    tr.radii.push_back(r);
    tr.osc.push_back(oscillation<N>(v, x1, r));
    tr.used.push_back(tr.osc.back() >= noise_floor && tr.osc.back() > 0.0);
    if (k > 0 && tr.osc[k] > tr.osc[k - 1]) tr.monotone = false;
  }
  std::vector<double> lr, lo, li;
  std::vector<double> lri;
  for (int k = 0; k < n_levels; ++k) {
    if (!tr.used[k]) continue;
    lr.push_back(std::log(tr.radii[k]));
    lo.push_back(std::log(tr.osc[k]));
  }
  if (lr.size() < 3) throw FitError("holder_fit: fewer than 3 usable levels");
  for (int k = 0; k + 1 < n_levels; ++k) {
    if (!tr.used[k] || !tr.used[k + 1]) continue;
    const double d = tr.osc[k] - tr.osc[k + 1];
    if (!(d > noise_floor) || !(d > 0.0)) continue;
    lri.push_back(std::log(tr.radii[k]));
    li.push_back(std::log(d));
  }
  const LineFit plain = least_squares(lr, lo);
  tr.alpha_plain = plain.slope;
  tr.C_plain = std::exp(plain.intercept);
  if (li.size() < 2) throw FitError("holder_fit: fewer than 2 resolved oscillation increments");
  const LineFit inc = least_squares(lri, li);
  tr.alpha = inc.slope;
  tr.C = std::exp(inc.intercept) / (1.0 - std::pow(level_ratio(), tr.alpha));
  tr.residual = inc.residual;
  return tr;
}

// ---------------------------------------------------------------------------
// Tails

struct TailEntry {
  double q = 1.0;
  double R = 0.0;
  std::vector<double> x0;
  double value = 0.0;
};

// ---------------------------------------------------------------------------
// Full report

struct AnchorEntry {
  std::vector<double> x1;
  OscillationTrace trace;
  std::string note;
};

struct DiagnosticsReport {
  std::string domain;
  double p = 2.0, s = 0.5;
  double h = 0.0;
  std::vector<int> n;
  double sup_quotient = 0.0;
  std::vector<AnchorEntry> anchors;
  std::vector<ExcessValue> excess;
  std::vector<TailEntry> tails;
  std::vector<CheckResult> checks;
  std::string regime;
  std::string version = kVersion;
  std::string config_hash;
  SolveStats stats;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
};

struct ReportOptions {
  double t = 2.0;             // scaling factor for the homogeneity rerun
  int anchors = 4;            // N = 2 only; N = 1 always uses both endpoints
  int max_levels = 8;
  double excess_scale = 0.0;  // 0: largest admissible R
  bool rerun = true;
};

template <int N>
std::vector<Vec<N>> boundary_anchors(const Domain<N>& domain, int count) {
  std::vector<Vec<N>> out;
  if constexpr (N == 1) {
    out.push_back(domain.boundary_point(0.0));
    out.push_back(domain.boundary_point(0.75));
  } else {
    for (int k = 0; k < count; ++k) out.push_back(domain.boundary_point(static_cast<double>(k) / count));
  }
  return out;
}

namespace detail {

template <int N>
std::vector<AnchorEntry> fit_anchors(const QuotientField<N>& v, const std::vector<Vec<N>>& anchors, double R0,
                                     const ReportOptions& opt, double noise) {
  std::vector<AnchorEntry> out;
  for (const auto& x1 : anchors) {
    AnchorEntry e;
    e.x1 = to_vector<N>(x1);
    const int L = std::min(opt.max_levels, usable_levels<N>(v, x1, R0, opt.max_levels));
    try {
      e.trace = holder_fit<N>(v, x1, R0, L, noise);
    } catch (const Error& err) {
      e.trace.anchor = e.x1;
      e.note = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

/// Solves with load f, measures the quotient and its oscillation decay at boundary
/// anchors, and reruns with t^{p-1} f to check the scaling law.
template <int N>
DiagnosticsReport theorem_main_report(const Domain<N>& domain, const std::function<double(const Vec<N>&)>& f,
                                      const SolverConfig& cfg, std::shared_ptr<const Grid<N>> grid,
                                      const ReportOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.domain = domain.describe();
  rep.p = cfg.p;
  rep.s = cfg.s;
  rep.h = grid->h();
  rep.n.assign(grid->shape().begin(), grid->shape().end());
  if constexpr (N == 1) rep.regime = "extrapolated regime";
  else rep.regime = "covered regime";

  const Field<N> load = Field<N>::sample(grid, f);
  auto sol = solve_dirichlet(load, cfg);
  rep.stats = sol.stats;
  const auto v = quotient(sol.u, domain, cfg.s);
  rep.sup_quotient = v.sup_abs;

  const double R0 = 2.0 * domain.interior_sphere_radius();
  const double noise = 100.0 * cfg.tol * v.sup_abs;
  const auto anchors = boundary_anchors<N>(domain, opt.anchors);
  rep.anchors = detail::fit_anchors<N>(v, anchors, R0, opt, noise);

  const double rho = domain.interior_sphere_radius();
  const double Rex = opt.excess_scale > 0.0 ? opt.excess_scale : 0.999 * rho / 4.0;
  for (const auto& x1 : anchors) {
    try {
      rep.excess.push_back(excess<N>(v, 0.0, Rex, x1, domain));
    } catch (const ResolutionError&) {
    }
    for (double q : {1.0, cfg.p - 1.0}) {
      const TailValue tv = tail<N>(sol.u, q, Rex, x1, cfg.s);
      rep.tails.push_back({q, Rex, to_vector<N>(x1), tv.value});
    }
  }

  rep.checks.push_back({"converged", sol.stats.converged, sol.stats.residual, sol.stats.threshold,
                        "final stationarity against the threshold"});
  bool mono = true;
  for (const auto& a : rep.anchors) mono = mono && a.trace.monotone;
  rep.checks.push_back({"oscillation_monotone", mono, mono ? 1.0 : 0.0, 0.0, "osc nonincreasing along every trace"});

  if (opt.rerun) {
    const double tp = std::pow(opt.t, cfg.p - 1.0);
    const Field<N> load2 = load.scaled(tp);
    auto sol2 = solve_dirichlet(load2, cfg);
    const auto v2 = quotient(sol2.u, domain, cfg.s);
    const double ratio = v.sup_abs > 0.0 ? v2.sup_abs / v.sup_abs : (v2.sup_abs == 0.0 ? opt.t : 0.0);
    const double rel = std::abs(ratio - opt.t) / opt.t;
    rep.checks.push_back({"scaling_sup_quotient", rel <= 1e-8, ratio, 1e-8, "sup|v'| / sup|v| against t"});
    const auto a2 = detail::fit_anchors<N>(v2, anchors, R0, opt, 100.0 * cfg.tol * v2.sup_abs);
    double worst = 0.0;
    bool comparable = true;
    for (std::size_t i = 0; i < a2.size(); ++i) {
      const double x = rep.anchors[i].trace.alpha, y = a2[i].trace.alpha;
      if (std::isnan(x) != std::isnan(y)) comparable = false;
      else if (!std::isnan(x)) worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(x)));
    }
    rep.checks.push_back({"scaling_alpha", comparable && worst <= 1e-8, worst, 1e-8,
                          "largest change of the fitted exponent under the rerun"});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Harnack-type monitors

struct HarnackReport {
  double level = 0.0;
  bool upper = false;   // false: inf(v - m); true: inf(M - v)
  double R = 0.0;
  std::vector<double> x0;
  double excess = 0.0;
  double inf_gap = 0.0;
  double ratio = 0.0;   // inf_gap / excess (0 when the excess vanishes)
  double tail1 = 0.0;
  double tail_pm1 = 0.0;
  double sup_u = 0.0;   // sup of u over D_{R/2}
  std::size_t nodes = 0;
};

template <int N>
HarnackReport harnack_report(const Field<N>& u, double level, bool upper, double R,
                             const std::type_identity_t<Vec<N>>& x0, const Domain<N>& domain, double p, double s) {
  const auto v = quotient(u, domain, s);
  const auto ex = excess<N>(v, level, R, x0, domain);
  HarnackReport rep;
  rep.level = level;
  rep.upper = upper;
  rep.R = R;
  rep.x0 = to_vector<N>(x0);
  rep.excess = ex.value;
  const Grid<N>& g = u.grid();
  rep.inf_gap = std::numeric_limits<double>::infinity();
  rep.sup_u = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i) || !(dist<N>(g.coord(i), x0) < 0.5 * R)) continue;
    rep.sup_u = std::max(rep.sup_u, u[i]);
    if (!v.included[i]) continue;
    rep.inf_gap = std::min(rep.inf_gap, upper ? level - v.values[i] : v.values[i] - level);
    ++rep.nodes;
  }
  if (rep.nodes == 0) throw ResolutionError("harnack_report: no included nodes in D_{R/2}");
  rep.ratio = rep.excess > 0.0 ? rep.inf_gap / rep.excess : 0.0;
  rep.tail1 = tail<N>(u, 1.0, R, x0, s).value;
  rep.tail_pm1 = tail<N>(u, std::max(1.0, p - 1.0), R, x0, s).value;
  return rep;
}

}  // namespace fracreg
