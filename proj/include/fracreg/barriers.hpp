#pragma once

// Explicit barriers: bump-perturbed distance powers, the normal-ball merge, and the
// obstacle-based upper barrier.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/function.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/morphology.hpp"
#include "fracreg/operator.hpp"
#include "fracreg/solver.hpp"

namespace fracreg {

/// Radial profile of the bump: 1 on [0, 1/2], 0 on [1, inf), exponential smooth step between.
inline double bump_profile(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  auto q = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
  const double z = 2.0 * (1.0 - t);
  const double a = q(z), b = q(1.0 - z);
  return a / (a + b);
}

template <int N>
double bump_eval(const Vec<N>& x) {
  return bump_profile(norm<N>(x));
}

enum class BarrierKind { bump_lower, bump_upper, superposed, obstacle_upper };

inline std::string to_string(BarrierKind k) {
  switch (k) {
    case BarrierKind::bump_lower: return "bump_lower";
    case BarrierKind::bump_upper: return "bump_upper";
    case BarrierKind::superposed: return "superposed";
    case BarrierKind::obstacle_upper: return "obstacle_upper";
  }
  return "?";
}

template <int N>
struct BarrierSpec {
  BarrierKind kind = BarrierKind::bump_lower;
  double lambda = 0.0;
  double R = 0.1;
  Vec<N> anchor{};
  double multiplier = 1.0;  // M of the upper bump barrier
};

template <int N>
void check_barrier_spec(const BarrierSpec<N>& spec, const Domain<N>& domain) {
  if (!(spec.R > 0.0) || !(spec.R < domain.interior_sphere_radius() / 4.0))
    throw PreconditionError("barrier: need 0 < R < rho/4");
}

/// (1 + lambda phi(2(x-x0)/R)) d^s for the lower kind, M (1 - lambda phi((x-x0)/R)) d^s for the upper kind.
template <int N>
double barrier_w_lambda(const BarrierSpec<N>& spec, const Domain<N>& domain, double s,
                        const std::type_identity_t<Vec<N>>& x) {
  const double ds = std::pow(domain.distance(x), s);
  const Vec<N> y = x - spec.anchor;
  switch (spec.kind) {
    case BarrierKind::bump_lower: return (1.0 + spec.lambda * bump_eval<N>((2.0 / spec.R) * y)) * ds;
    case BarrierKind::bump_upper:
      return spec.multiplier * (1.0 - spec.lambda * bump_eval<N>((1.0 / spec.R) * y)) * ds;
    default: throw PreconditionError("barrier_w_lambda: needs a bump kind");
  }
}

template <int N>
Function<N> barrier_function(const BarrierSpec<N>& spec, const Domain<N>& domain, double s) {
  if (spec.kind != BarrierKind::bump_lower && spec.kind != BarrierKind::bump_upper)
    throw PreconditionError("barrier_function: needs a bump kind");
  auto [lo, hi] = domain.bounding_box();
  return Function<N>([spec, domain, s](const Vec<N>& x) { return barrier_w_lambda<N>(spec, domain, s, x); }, lo, hi,
                     {domain});
}

/// Interpolant of a field as a closed-form function (zero outside the grid box).
template <int N>
Function<N> interpolant(const Field<N>& u, std::vector<Domain<N>> interfaces = {}) {
  auto f = std::make_shared<Field<N>>(u);
  return Function<N>([f](const Vec<N>& x) { return f->interpolate(x); }, u.grid().lo(), u.grid().hi(),
                     std::move(interfaces));
}

// ---------------------------------------------------------------------------
// Bound verification for the bump barriers

struct BarrierRow {
  double lambda = 0.0;
  double K = 0.0;      // sup |(-Delta)_p^s w_lambda| over the evaluation nodes
  double ratio = 0.0;  // K / (1 + |lambda| / R^s)
  std::size_t points = 0;
};

struct BarrierSweep {
  double h = 0.0;
  std::vector<BarrierRow> rows;
  double C6 = 0.0;       // max ratio over the sweep
  double lambda1 = 0.0;  // largest accepted |lambda|
  bool finite = true;
};

/// Nodes of the lattice with spacing h (centered on the domain) lying in D_r(x0) with d >= 2h.
template <int N>
std::vector<Vec<N>> boundary_patch_nodes(const Domain<N>& domain, const Vec<N>& x0, double r, double h) {
  const Grid<N> g = Grid<N>::around(domain, h);
  std::vector<Vec<N>> pts;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec<N> x = g.coord(i);
    if (dist<N>(x, x0) < r && domain.distance(x) >= 2.0 * h) pts.push_back(x);
  }
  return pts;
}

template <int N>
BarrierSweep verify_barrier_bound(const BarrierSpec<N>& spec, const Domain<N>& domain, double p, double s, double h,
                                  const std::vector<double>& lambdas, QuadratureScheme scheme = {}) {
  check_barrier_spec(spec, domain);
  if (spec.kind != BarrierKind::bump_lower && spec.kind != BarrierKind::bump_upper)
    throw PreconditionError("verify_barrier_bound: needs a bump kind");
  scheme.h = h;
  const auto pts = boundary_patch_nodes<N>(domain, spec.anchor, 0.5 * spec.R, h);
  if (pts.empty()) throw ResolutionError("verify_barrier_bound: no evaluation nodes in D_{R/2}");
  BarrierSweep sw;
  sw.h = h;
  const double Rs = std::pow(spec.R, s);
  for (double lam : lambdas) {
    BarrierSpec<N> sp = spec;
    sp.lambda = lam;
    const auto w = barrier_function<N>(sp, domain, s);
    BarrierRow row;
    row.lambda = lam;
    row.points = pts.size();
    for (const auto& x : pts) row.K = std::max(row.K, std::abs(pointwise_flap<N>(w, x, p, s, scheme, &domain)));
    row.ratio = row.K / (1.0 + std::abs(lam) / Rs);
    sw.finite = sw.finite && std::isfinite(row.K);
    sw.C6 = std::max(sw.C6, row.ratio);
    sw.rows.push_back(row);
  }
  // 0 <= phi <= 1, so |lambda| <= 1/2 keeps 1 + lambda phi >= 1/2
  for (const auto& row : sw.rows)
    if (std::abs(row.lambda) <= 0.5) sw.lambda1 = std::max(sw.lambda1, std::abs(row.lambda));
  return sw;
}

inline std::vector<double> symmetric_sweep(double lambda_max, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(-lambda_max + 2.0 * lambda_max * i / (count - 1));
  if (count % 2 == 1) out[count / 2] = 0.0;
  return out;
}

struct BarrierBoundReport {
  BarrierSweep coarse, fine;
  double lambda1 = 0.0;  // largest |lambda| up to which every row is refinement-stable
  CheckResult bounded, stable;
};

/// Sweep at h and h/2; the fitted constant must be finite and agree within a factor 2.
template <int N>
BarrierBoundReport barrier_bound_report(const BarrierSpec<N>& spec, const Domain<N>& domain, double p, double s,
                                        double h, const std::vector<double>& lambdas) {
  BarrierBoundReport r;
  r.coarse = verify_barrier_bound(spec, domain, p, s, h, lambdas);
  r.fine = verify_barrier_bound(spec, domain, p, s, 0.5 * h, lambdas);
  bool bounded = r.coarse.finite && r.fine.finite;
  for (const auto* sw : {&r.coarse, &r.fine})
    for (const auto& row : sw->rows) bounded = bounded && row.ratio <= sw->C6;
  r.bounded = {"barrier_ratio_bounded", bounded && std::isfinite(r.coarse.C6), r.coarse.C6, 0.0,
               "max over the sweep of K/(1+|lambda|/R^s)"};
  for (const auto& a : r.coarse.rows) {
    bool ok = std::abs(a.lambda) <= r.coarse.lambda1;
    for (const auto& b : r.coarse.rows) {
      if (std::abs(b.lambda) > std::abs(a.lambda)) continue;
      for (const auto& c : r.fine.rows)
        if (c.lambda == b.lambda) ok = ok && c.ratio <= 2.0 * b.ratio && b.ratio <= 2.0 * c.ratio;
    }
    if (ok) r.lambda1 = std::max(r.lambda1, std::abs(a.lambda));
  }
  const double q = r.fine.C6 > 0.0 ? r.coarse.C6 / r.fine.C6 : std::numeric_limits<double>::infinity();
  r.stable = {"barrier_refinement_stable", q <= 2.0 && q >= 0.5, q, 2.0, "ratio of C6 at h and h/2"};
  return r;
}

// ---------------------------------------------------------------------------
// Normal-ball merge

template <int N>
struct SuperposedReport {
  Function<N> merged;
  std::vector<Vec<N>> points;
  std::vector<double> flap_w, total, correction;
  double excess = 0.0;  // mean |u/d^s - w/d^s| over the normal ball
  double c_fit = 0.0;   // min over points of (flap_w - total) R^s / excess^{p-1}
};

/// w~ = w outside the normal ball, u inside; the operator of w~ on D_R(x0) via superposition.
template <int N>
SuperposedReport<N> build_superposed(const BarrierSpec<N>& spec, const Function<N>& w, const Function<N>& u,
                                     const NormalBall<N>& nb, const Domain<N>& domain, double p, double s, double h,
                                     QuadratureScheme scheme = {}) {
  scheme.h = h;
  SuperposedReport<N> rep;
  rep.merged = merge<N>(w, u, nb.center, nb.radius);
  rep.points = boundary_patch_nodes<N>(domain, spec.anchor, spec.R, h);
  for (const auto& x : rep.points)
    if (!(dist<N>(x, nb.center) > nb.radius)) throw PreconditionError("build_superposed: normal ball meets the evaluation region");
  // excess of u against w, measured on a polar sample of the ball
  const auto samples = sample_ball<N>(nb.center, nb.radius * (1.0 - 1e-9), 16, 32);
  CompensatedSum ex;
  for (const auto& y : samples) ex.add(std::abs(u(y) - w(y)) / std::pow(domain.distance(y), s));
  rep.excess = ex.value() / samples.size();
  rep.c_fit = std::numeric_limits<double>::infinity();
  for (const auto& x : rep.points) {
    const auto sp = superpose<N>(w, u, nb.center, nb.radius, x, p, s, scheme, &domain);
    const double fw = sp.total - sp.correction;
    rep.flap_w.push_back(fw);
    rep.total.push_back(sp.total);
    rep.correction.push_back(sp.correction);
    if (rep.excess > 0.0)
      rep.c_fit = std::min(rep.c_fit, (fw - sp.total) * std::pow(spec.R, s) / std::pow(rep.excess, p - 1.0));
  }
  if (!std::isfinite(rep.c_fit)) rep.c_fit = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Obstacle-based upper barrier

template <int N>
struct UpperBarrier {
  Field<N> v;
  Field<N> lower, upper;
  Mask region;          // E_R
  double lambda = 1.0;  // final multiplier of the upper obstacle
  double C_tilde = 0.0; // 1 / min of v/d^s on D_{3R} \ D_R
  double C_flap = 0.0;  // max |(-Delta)_p^s v| R^s on the admissible part of D_{2R}
  double C_size = 0.0;  // max |v| / R^s on D_{2R}
  double c_lower = 0.0; // min v / d^s on D_R^c (nodes with d >= h)
  double c_ring = 0.0;  // min v / d^s on D_{3R} \ D_R
  double v_at_center = 0.0;
  double v_min = 0.0;
  double v_max_over_Rs = 0.0;
  std::vector<CheckResult> checks;
  SolveStats stats;
};

template <int N>
UpperBarrier<N> build_upper_barrier(const Domain<N>& domain, const std::type_identity_t<Vec<N>>& x0, double R,
                                    const std::type_identity_t<Vec<N>>& xbar, const SolverConfig& cfg,
                                    std::shared_ptr<const Grid<N>> grid) {
  cfg.validate();
  const double rho = domain.interior_sphere_radius();
  if (!(R > 0.0 && R < rho / 4.0)) throw PreconditionError("build_upper_barrier: need R < rho/4");
  if (!(dist<N>(xbar, x0) < 0.5 * R) || !domain.contains(xbar))
    throw PreconditionError("build_upper_barrier: xbar must lie in D_{R/2}(x0)");
  const Grid<N>& g = *grid;
  const std::size_t nbar = g.index(g.nearest(xbar));
  if (dist<N>(g.coord(nbar), xbar) > 1e-9 * g.h()) throw PreconditionError("build_upper_barrier: xbar must be a grid node");
  const double p = cfg.p, s = cfg.s;
  const double scale = std::pow(R, -s / (p - 1.0));

  // Step 1: E_R, the opening of D_{4R} \ D_{3R/4} by balls of radius R/8
  ParentSet<N> parent{x0, 4.0 * R, 0.75 * R};
  auto reg = opened_region(domain, parent, R / 8.0, g);

  UpperBarrier<N> out{Field<N>(grid), Field<N>(grid), Field<N>(grid)};
  out.region = reg.occupancy;

  // Step 2: lower obstacle from the torsion of E_R
  Mask ER = reg.occupancy;
  for (std::size_t i = 0; i < g.size(); ++i) ER[i] = ER[i] && g.is_interior(i);
  auto tE = solve_torsion_on(grid, ER, cfg);
  Field<N> lower(grid);
  for (std::size_t i = 0; i < g.size(); ++i) lower[i] = g.is_interior(i) ? scale * tE.u[i] : 0.0;

  // Step 3: upper obstacle from the torsion of B_{R/8}(xbar)
  Mask B = mask_where(g, [&](std::size_t, const Vec<N>& x) { return dist<N>(x, xbar) < R / 8.0; });
  auto tB = solve_torsion_on(grid, B, cfg);
  const double umax = tB.u.sup_abs();
  if (tB.u[nbar] != umax) throw ConstructionError("build_upper_barrier: small torsion does not peak at xbar");
  Field<N> upper(grid);
  double lam = 1.0;
  for (int it = 0;; ++it) {
    bool ok = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      upper[i] = g.is_interior(i) ? lam * scale * (umax - tB.u[i]) : 0.0;
      if (g.is_interior(i) && upper[i] < lower[i]) ok = false;
    }
    if (ok) break;
    if (it >= 60) throw ConstructionError("build_upper_barrier: obstacles stay infeasible");
    lam *= 2.0;
  }
  out.lambda = lam;

  // Step 4: double obstacle solution, extended by d^s / C~ outside D_{3R}
  auto sol = solve_double_obstacle(lower, upper, cfg);
  Field<N> v = sol.u;
  double cmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i)) continue;
    const Vec<N> x = g.coord(i);
    const double d = domain.distance(x), r = dist<N>(x, x0);
    if (d >= g.h() && r >= R && r < 3.0 * R) cmin = std::min(cmin, v[i] / std::pow(d, s));
  }
  if (!(cmin > 0.0) || !std::isfinite(cmin)) throw ConstructionError("build_upper_barrier: v does not dominate d^s on the ring");
  out.C_tilde = 1.0 / cmin;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i)) continue;
    const Vec<N> x = g.coord(i);
    if (dist<N>(x, x0) >= 3.0 * R) v[i] = std::max(v[i], std::pow(domain.distance(x), s) * cmin);
  }

  // claims (i)-(iv)
  PairOperator<N> op(grid, g.interior(), p, s, false);
  const auto xv = op.gather(v);
  const double Rs = std::pow(R, s);
  out.c_lower = out.c_ring = std::numeric_limits<double>::infinity();
  out.v_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i)) continue;
    const Vec<N> x = g.coord(i);
    const double d = domain.distance(x), r = dist<N>(x, x0);
    out.v_min = std::min(out.v_min, v[i]);
    if (r < 2.0 * R) {
      out.C_size = std::max(out.C_size, std::abs(v[i]) / Rs);
      // admissible interior: away from the boundary and off both contact sets
      if (d >= 2.0 * g.h() && v[i] > lower[i] && v[i] < upper[i])
        out.C_flap = std::max(out.C_flap, std::abs(op.flap_at_node(xv, i)) * Rs);
    }
    if (d >= g.h() && r >= R) {
      const double q = v[i] / std::pow(d, s);
      out.c_lower = std::min(out.c_lower, q);
      if (r < 3.0 * R) out.c_ring = std::min(out.c_ring, q);
    }
  }
  out.v_at_center = v[nbar];
  out.v_max_over_Rs = out.C_size;
  out.checks.push_back({"upper_barrier_center_zero", v[nbar] == 0.0, v[nbar], 0.0, "v(xbar) == 0 exactly"});
  out.checks.push_back({"upper_barrier_nonnegative", out.v_min >= 0.0, out.v_min, 0.0, "min v over interior nodes"});
  out.checks.push_back({"upper_barrier_size", std::isfinite(out.C_size) && out.C_size > 0.0, out.C_size, 0.0,
                        "max |v|/R^s on D_2R"});
  out.checks.push_back({"upper_barrier_ring_lower", out.c_ring > 0.0 && std::isfinite(out.c_ring), out.c_ring, 0.0,
                        "min v/d^s on D_3R minus D_R"});
  out.checks.push_back({"upper_barrier_outer_lower", out.c_lower > 0.0 && std::isfinite(out.c_lower), out.c_lower, 0.0,
                        "min v/d^s outside D_R"});
  bool feasible = true;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.is_interior(i) && dist<N>(g.coord(i), x0) < 3.0 * R && (v[i] < lower[i] || v[i] > upper[i])) feasible = false;
  out.checks.push_back({"upper_barrier_feasible", feasible, feasible ? 1.0 : 0.0, 0.0, "lower <= v <= upper on D_3R"});
  out.v = std::move(v);
  out.lower = std::move(lower);
  out.upper = std::move(upper);
  out.stats = std::move(sol.stats);
  return out;
}

}  // namespace fracreg
