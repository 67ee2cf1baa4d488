#pragma once

// Energy minimization for the discrete Dirichlet, torsion and double obstacle
// problems, plus the comparison / Hopf / global-subsolution checks.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/operator.hpp"

namespace fracreg {

enum class Descent { two_point, lbfgs };

inline std::string to_string(Descent d) { return d == Descent::two_point ? "two_point" : "lbfgs"; }

struct SolverConfig {
  double p = 2.0;
  double s = 0.5;
  double tol = 1e-8;
  long max_iter = 50000;
  Descent method = Descent::two_point;
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  int nonmonotone_window = 10;
  int memory = 10;
  double init_tol = 1e-4;  // relative tolerance of the linear warm start when p > 2
  bool projection = false;

  void validate() const {
    detail::check_ps(p, s);
    if (!(tol > 0.0)) throw PreconditionError("solver: tolerance must be positive");
    if (max_iter < 1) throw PreconditionError("solver: max_iter must be positive");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) throw PreconditionError("solver: bad Armijo constant");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw PreconditionError("solver: bad backtracking factor");
    if (nonmonotone_window < 1 || memory < 1) throw PreconditionError("solver: window and memory must be >= 1");
  }
};

struct SolveStats {
  std::string method;
  long iterations = 0;
  long evaluations = 0;
  long warm_start_iterations = 0;
  long nonmonotone_steps = 0;
  double residual = 0.0;   // final stationarity measure in gradient units
  double threshold = 0.0;  // stopping threshold in the same units
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<double> energy_history;
};

template <int N>
struct Solution {
  Field<N> u;
  SolveStats stats;
};

struct Bounds {
  std::vector<double> lo, hi;
  bool active() const { return !lo.empty(); }
};

namespace detail {

inline double norm_inf(std::span<const double> v) { return max_abs(v); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

/// Largest violation of the first-order conditions of min F over the box.
inline double stationarity(std::span<const double> x, std::span<const double> g, const Bounds* b) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = std::abs(g[i]);
    if (b && b->active()) {
      if (x[i] <= b->lo[i] && x[i] >= b->hi[i]) v = 0.0;
      else if (x[i] <= b->lo[i]) v = std::max(0.0, -g[i]);
      else if (x[i] >= b->hi[i]) v = std::max(0.0, g[i]);
    }
    m = std::max(m, v);
  }
  return m;
}

inline void project(std::span<double> x, const Bounds* b) {
  if (!b || !b->active()) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], b->lo[i], b->hi[i]);
}

// Rounding slack in the sufficient-decrease test; relative so it scales with F.
inline double decrease_slack(double F) { return 1e-14 * std::abs(F); }

}  // namespace detail

/// Two-point step (Barzilai-Borwein) gradient with the Grippo-Lampariello-Lucidi
/// nonmonotone line search; with bounds this is the spectral projected gradient.
/// fg(x, g) returns F(x) and writes its gradient.
template <class FG>
SolveStats minimize_two_point(FG&& fg, std::vector<double>& x, double threshold, double alpha0,
                              const SolverConfig& cfg, const Bounds* bounds = nullptr) {
  SolveStats st;
  st.method = bounds && bounds->active() ? "spectral_projected_gradient" : "two_point";
  st.threshold = threshold;
  const std::size_t n = x.size();
  detail::project(x, bounds);
  std::vector<double> g(n), xt(n), gt(n), d(n);
  double F = fg(x, g);
  ++st.evaluations;
  std::deque<double> window{F};
  double viol = detail::stationarity(x, g, bounds);
  st.residual_history.push_back(viol);
  st.energy_history.push_back(F);
  double alpha = alpha0;
  double ref_prev = F;
  while (viol > threshold) {
    if (st.iterations >= cfg.max_iter) {
      st.residual = viol;
      throw NonconvergenceError("two-point gradient: iteration cap reached", viol, st.iterations);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -alpha * g[i];
    if (bounds && bounds->active()) {
      for (std::size_t i = 0; i < n; ++i) d[i] = std::clamp(x[i] + d[i], bounds->lo[i], bounds->hi[i]) - x[i];
    }
    const double gd = detail::dot(g, d);
    const double Fref = *std::max_element(window.begin(), window.end());
    double lambda = 1.0, Ft = 0.0;
    int backtracks = 0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + lambda * d[i];
      Ft = fg(xt, gt);
      ++st.evaluations;
      if (Ft <= Fref + cfg.sufficient_decrease * lambda * gd + detail::decrease_slack(Fref)) break;
      lambda *= cfg.backtrack;
      if (++backtracks > 60) {
        st.residual = viol;
        throw NonconvergenceError("two-point gradient: line search failed", viol, st.iterations);
      }
    }
    if (Ft > F) ++st.nonmonotone_steps;
    double sts = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = xt[i] - x[i], yi = gt[i] - g[i];
      sts += si * si;
      sty += si * yi;
    }
    alpha = (sty > 0.0 && sts > 0.0) ? sts / sty : 2.0 * alpha;
    x.swap(xt);
    g.swap(gt);
    F = Ft;
    window.push_back(F);
    if (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();
    // the reference level of the nonmonotone search never increases
    const double ref = *std::max_element(window.begin(), window.end());
    if (ref > ref_prev + detail::decrease_slack(ref_prev))
      throw NumericError("two-point gradient: reference energy increased");
    ref_prev = ref;
    ++st.iterations;
    viol = detail::stationarity(x, g, bounds);
    st.residual_history.push_back(viol);
    st.energy_history.push_back(F);
  }
  st.residual = viol;
  st.converged = true;
  return st;
}

/// Limited-memory BFGS with monotone Armijo backtracking.
template <class FG>
SolveStats minimize_lbfgs(FG&& fg, std::vector<double>& x, double threshold, double alpha0, const SolverConfig& cfg) {
  SolveStats st;
  st.method = "lbfgs";
  st.threshold = threshold;
  const std::size_t n = x.size();
  std::vector<double> g(n), xt(n), gt(n), d(n), q(n);
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  double F = fg(x, g);
  ++st.evaluations;
  double viol = detail::norm_inf(g);
  st.residual_history.push_back(viol);
  st.energy_history.push_back(F);
  while (viol > threshold) {
    if (st.iterations >= cfg.max_iter) {
      st.residual = viol;
      throw NonconvergenceError("lbfgs: iteration cap reached", viol, st.iterations);
    }
    // two-loop recursion
    q = g;
    std::vector<double> a(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      a[k] = rho[k] * detail::dot(S[k], q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= a[k] * Y[k][i];
    }
    double gamma = alpha0;
    if (!S.empty()) gamma = detail::dot(S.back(), Y.back()) / detail::dot(Y.back(), Y.back());
    for (std::size_t i = 0; i < n; ++i) q[i] *= gamma;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double b = rho[k] * detail::dot(Y[k], q);
      for (std::size_t i = 0; i < n; ++i) q[i] += (a[k] - b) * S[k][i];
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -q[i];
    double gd = detail::dot(g, d);
    if (!(gd < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -alpha0 * g[i];
      gd = detail::dot(g, d);
    }
    double lambda = 1.0, Ft = 0.0;
    int backtracks = 0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + lambda * d[i];
      Ft = fg(xt, gt);
      ++st.evaluations;
      if (Ft <= F + cfg.sufficient_decrease * lambda * gd + detail::decrease_slack(F)) break;
      lambda *= cfg.backtrack;
      if (++backtracks > 60) {
        st.residual = viol;
        throw NonconvergenceError("lbfgs: line search failed", viol, st.iterations);
      }
    }
    if (Ft > F + detail::decrease_slack(F)) throw NumericError("lbfgs: energy increased");
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xt[i] - x[i];
      y[i] = gt[i] - g[i];
    }
    const double sy = detail::dot(s, y);
    if (sy > 0.0) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > cfg.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x.swap(xt);
    g.swap(gt);
    F = Ft;
    ++st.iterations;
    viol = detail::norm_inf(g);
    st.residual_history.push_back(viol);
    st.energy_history.push_back(F);
  }
  st.residual = viol;
  st.converged = true;
  return st;
}

/// Conjugate gradients for the linear-law operator: flap_linear(w) = load, stopped on the max norm.
template <int N>
SolveStats conjugate_gradient(const PairOperator<N>& op, std::span<const double> load, std::vector<double>& w,
                              double tol_inf, long max_iter) {
  SolveStats st;
  st.method = "conjugate_gradient";
  st.threshold = tol_inf;
  const std::size_t n = load.size();
  w.assign(n, 0.0);
  std::vector<double> r(load.begin(), load.end()), pdir(r), Ap(n);
  double rr = detail::dot(r, r);
  double rinf = detail::norm_inf(r);
  st.residual_history.push_back(rinf);
  while (rinf > tol_inf) {
    if (st.iterations >= max_iter) throw NonconvergenceError("conjugate gradient: iteration cap reached", rinf, st.iterations);
    op.flap_linear(pdir, Ap);
    const double alpha = rr / detail::dot(pdir, Ap);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += alpha * pdir[i];
      r[i] -= alpha * Ap[i];
    }
    const double rr_new = detail::dot(r, r);
    ++st.iterations;
    rinf = detail::norm_inf(r);
    if (rinf <= tol_inf || st.iterations % 50 == 0) {
      // replace the recursive residual by the true one
      op.flap_linear(w, Ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = load[i] - Ap[i];
      rinf = detail::norm_inf(r);
      const double rr_true = detail::dot(r, r);
      if (rinf <= tol_inf) break;
      const double beta = rr_true / rr;
      for (std::size_t i = 0; i < n; ++i) pdir[i] = r[i] + beta * pdir[i];
      rr = rr_true;
    } else {
      const double beta = rr_new / rr;
      for (std::size_t i = 0; i < n; ++i) pdir[i] = r[i] + beta * pdir[i];
      rr = rr_new;
    }
    st.residual_history.push_back(rinf);
  }
  st.residual = rinf;
  st.converged = true;
  return st;
}

/// Minimizes J(u) - h^N <load, u> over the active set of op. Returns compact values.
template <int N>
std::vector<double> solve_compact(const PairOperator<N>& op, std::span<const double> load, const SolverConfig& cfg,
                                  SolveStats& stats) {
  cfg.validate();
  if (op.p() != cfg.p || op.s() != cfg.s) throw ContractError("solver: operator and config disagree on p or s");
  const std::size_t n = op.unknowns();
  const double hN = op.node_weight();
  const double fmax = detail::norm_inf(load);
  std::vector<double> x(n, 0.0);
  if (n == 0 || fmax == 0.0) {
    stats = SolveStats{};
    stats.method = "trivial";
    stats.converged = true;
    return x;
  }
  const double threshold = cfg.tol * hN * fmax;
  // the linear law on the same kernel: exact problem for p = 2, warm start otherwise
  const double lin_tol = cfg.p == 2.0 ? cfg.tol * fmax : cfg.init_tol * fmax;
  SolveStats cg = conjugate_gradient(op, load, x, lin_tol, cfg.max_iter);
  if (cfg.p == 2.0) {
    stats = cg;
    stats.threshold = threshold;
    stats.residual = hN * cg.residual;
    for (double& r : stats.residual_history) r *= hN;
    std::vector<double> g(n);
    stats.energy_history.push_back(op.objective(x, load, g));
    return x;
  }
  // rescale so that the warm start is optimal along its own ray
  const double work = hN * detail::dot(load, x);
  const double Jp = op.energy(x);
  if (work > 0.0 && Jp > 0.0) {
    const double ratio = work / (cfg.p * Jp);
    const double c = cfg.p == 3.0 ? std::sqrt(ratio) : std::pow(ratio, 1.0 / (cfg.p - 1.0));
    for (double& v : x) v *= c;
  }
  const double xs = std::max(detail::norm_inf(x), std::numeric_limits<double>::min());
  const double alpha0 = 1.0 / ((cfg.p - 1.0) * op.linear_diagonal() * std::pow(xs, cfg.p - 2.0));
  auto fg = [&](std::span<const double> xx, std::span<double> gg) { return op.objective(xx, load, gg); };
  stats = cfg.method == Descent::lbfgs ? minimize_lbfgs(fg, x, threshold, alpha0, cfg)
                                       : minimize_two_point(fg, x, threshold, alpha0, cfg);
  stats.warm_start_iterations = cg.iterations;
  return x;
}

/// Dirichlet problem on the interior nodes of the field's grid.
template <int N>
Solution<N> solve_dirichlet(const Field<N>& f, const SolverConfig& cfg) {
  if (f.kind() != FieldKind::dirichlet) throw ContractError("solve_dirichlet: load must be of dirichlet kind");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) throw PreconditionError("solve_dirichlet: load is not bounded");
  PairOperator<N> op(f.grid_ptr(), f.grid().interior(), cfg.p, cfg.s);
  SolveStats st;
  auto x = solve_compact(op, op.gather(f), cfg, st);
  return {op.scatter(x), std::move(st)};
}

template <int N, class F>
Solution<N> solve_dirichlet(std::shared_ptr<const Grid<N>> grid, F&& f, const SolverConfig& cfg) {
  return solve_dirichlet(Field<N>::sample(grid, std::forward<F>(f)), cfg);
}

template <int N>
Solution<N> solve_torsion(std::shared_ptr<const Grid<N>> grid, const SolverConfig& cfg) {
  return solve_dirichlet(Field<N>::sample(grid, [](const Vec<N>&) { return 1.0; }), cfg);
}

/// Torsion on an arbitrary node set (zero on every other node).
template <int N>
Solution<N> solve_torsion_on(std::shared_ptr<const Grid<N>> grid, const Mask& mask, const SolverConfig& cfg) {
  PairOperator<N> op(grid, mask, cfg.p, cfg.s);
  std::vector<double> load(op.unknowns(), 1.0);
  SolveStats st;
  auto x = solve_compact(op, load, cfg, st);
  Field<N> u = op.scatter(x, FieldKind::free);
  return {std::move(u), std::move(st)};
}

/// Minimizer of J over {lower <= u <= upper} on the interior nodes (f = 0 unless given).
template <int N>
Solution<N> solve_double_obstacle(const Field<N>& lower, const Field<N>& upper, const SolverConfig& cfg,
                                  const Field<N>* load = nullptr) {
  cfg.validate();
  require_same_grid(lower, upper);
  PairOperator<N> op(lower.grid_ptr(), lower.grid().interior(), cfg.p, cfg.s);
  Bounds b{op.gather(lower), op.gather(upper)};
  for (std::size_t i = 0; i < b.lo.size(); ++i)
    if (!(b.lo[i] <= b.hi[i])) throw ContractError("solve_double_obstacle: lower obstacle exceeds upper obstacle");
  std::vector<double> f = load ? op.gather(*load) : std::vector<double>(op.unknowns(), 0.0);
  const double hN = op.node_weight();
  SolveStats st;
  if (b.lo == b.hi) {
    st.method = "feasible_singleton";
    st.converged = true;
    return {op.scatter(b.lo), st};
  }
  std::vector<double> x(op.unknowns(), 0.0);
  detail::project(x, &b);
  std::vector<double> g(x.size());
  op.objective(x, f, g);
  const double scale = std::max(hN * detail::norm_inf(f), detail::stationarity(x, g, &b));
  const double xs = std::max({detail::norm_inf(b.lo), detail::norm_inf(x), std::numeric_limits<double>::min()});
  const double alpha0 = 1.0 / ((cfg.p - 1.0) * op.linear_diagonal() * std::pow(xs, cfg.p - 2.0));
  auto fg = [&](std::span<const double> xx, std::span<double> gg) { return op.objective(xx, f, gg); };
  if (scale > 0.0) st = minimize_two_point(fg, x, cfg.tol * scale, alpha0, cfg, &b);
  else st.converged = true;
  return {op.scatter(x), std::move(st)};
}

// ---------------------------------------------------------------------------
// Checks

template <int N>
CheckResult check_comparison(const Field<N>& u, const Field<N>& v, const Field<N>& fu, const Field<N>& fv,
                             const SolverConfig& cfg) {
  require_same_grid(u, v);
  require_same_grid(fu, fv);
  for (std::size_t i = 0; i < fu.size(); ++i)
    if (fu[i] > fv[i]) throw PreconditionError("check_comparison: loads are not ordered");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) m = std::min(m, v[i] - u[i]);
  const double scale = std::max({u.sup_abs(), v.sup_abs(), 1e-300});
  const double tol = 10.0 * cfg.tol * scale;
  return {"comparison", m >= -tol, m, tol, "min(v-u) over nodes"};
}

struct SubsolutionReport {
  CheckResult check;
  double max_interior = -std::numeric_limits<double>::infinity();
  double max_exterior = -std::numeric_limits<double>::infinity();
  std::size_t interior_points = 0;
  std::size_t exterior_points = 0;
};

/// Lattice value of (-Delta)_p^s u at the given nodes; pass iff every value is <= 1 + tol_q.
template <int N>
SubsolutionReport check_global_subsolution(const Field<N>& u, const Domain<N>& domain, const SolverConfig& cfg,
                                           const std::vector<std::size_t>& nodes) {
  const Grid<N>& g = u.grid();
  PairOperator<N> op(u.grid_ptr(), g.interior(), cfg.p, cfg.s, false);
  const auto x = op.gather(u);
  SubsolutionReport rep;
  for (std::size_t node : nodes) {
    const Vec<N> y = g.coord(node);
    const double sd = domain.inner_distance(y);
    if (sd >= 0.0 && sd < 2.0 * g.h()) continue;
    const double v = op.flap_at_node(x, node);
    if (sd > 0.0) {
      rep.max_interior = std::max(rep.max_interior, v);
      ++rep.interior_points;
    } else {
      rep.max_exterior = std::max(rep.max_exterior, v);
      ++rep.exterior_points;
    }
  }
  const double tol_q = 10.0 * cfg.tol;
  const double worst = std::max(rep.max_interior, rep.max_exterior);
  rep.check = {"global_subsolution", worst <= 1.0 + tol_q && rep.max_exterior <= 0.0 + tol_q, worst, 1.0 + tol_q,
               "max of the operator at sampled nodes"};
  return rep;
}

/// c_emp = min over interior nodes with d >= h of u / d^s.
template <int N>
CheckResult check_hopf(const Field<N>& u, const Domain<N>& domain, double s) {
  const Grid<N>& g = u.grid();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i)) continue;
    const double d = domain.distance(g.coord(i));
    if (d < g.h()) continue;
    m = std::min(m, u[i] / std::pow(d, s));
  }
  return {"hopf", m > 0.0 && std::isfinite(m), m, 0.0, "min u/d^s over nodes with d >= h"};
}

}  // namespace fracreg
