#pragma once

// Discrete and pointwise evaluation of the fractional p-Laplacian
//   (-Delta)_p^s u(x) = 2 P.V. \int (u(x)-u(y))^{p-1} |x-y|^{-N-ps} dy,
// with a^{p-1} := |a|^{p-2} a.
//
// Fields live on a lattice. The discrete energy is the all-pairs lattice sum of
// |u_i-u_j|^p K_ij over the infinite lattice, u vanishing off the active set;
// the exterior part is folded into one coefficient kappa_i per active node.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/function.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"
#include "fracreg/quadrature.hpp"

namespace fracreg {

/// Parameters for pointwise P.V. evaluation.
struct QuadratureScheme {
  double h = 0.0;     // spacing of the grid the evaluation points come from (0: no margin check)
  double eps = 0.0;   // inner exclusion radius; 0 selects 1e-3 h (or 1e-6 without a grid)
  double split = 0.0; // far-field radius T; 0 selects the support diameter
  bool far_field = true;
  bool compensate = true;  // close [0, eps) with the fitted local power law
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_intervals = 4000;

  static QuadratureScheme for_spacing(double h) {
    QuadratureScheme q;
    q.h = h;
    return q;
  }

  double inner_radius() const {
    if (eps > 0.0) return eps;
    return h > 0.0 ? 1e-3 * h : 1e-6;
  }

  void validate() const {
    const double e = inner_radius();
    if (!(e > 0.0)) throw PreconditionError("quadrature: inner radius must be positive");
    if (h > 0.0 && e > h) throw PreconditionError("quadrature: inner radius exceeds h");
    if (split > 0.0 && split < std::max(h, e)) throw PreconditionError("quadrature: split radius below h");
  }
};

struct TailValue {
  double q = 1.0;
  double R = 0.0;
  double value = 0.0;
};

namespace detail {

// Signed power laws; Linear and Cubic are exact for p = 2 and p = 3.
struct LinearLaw {
  double p = 2.0;
  double phi(double a) const { return a; }
  double pw(double a) const { return a * a; }
};
struct CubicLaw {
  double p = 3.0;
  double phi(double a) const { return a * std::abs(a); }
  double pw(double a) const {
    const double b = std::abs(a);
    return b * b * b;
  }
};
struct PowerLaw {
  double p;
  double phi(double a) const { return std::copysign(std::pow(std::abs(a), p - 1.0), a); }
  double pw(double a) const { return std::pow(std::abs(a), p); }
};

template <class F>
decltype(auto) dispatch_law(double p, F&& f) {
  if (p == 2.0) return f(LinearLaw{});
  if (p == 3.0) return f(CubicLaw{});
  return f(PowerLaw{p});
}

inline void check_ps(double p, double s) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw PreconditionError("p must be >= 2");
  if (!(s > 0.0 && s < 1.0)) throw PreconditionError("s must lie in (0,1)");
}

}  // namespace detail

/// Lattice operator on an active node set; all other nodes are held at 0.
template <int N>
class PairOperator {
 public:
  struct Run {
    int x0, x1;       // [x0, x1) along the first axis
    std::size_t c0;   // compact index of x0
  };

  PairOperator(std::shared_ptr<const Grid<N>> grid, const Mask& active, double p, double s,
               bool with_kappa = true)
      : grid_(std::move(grid)), p_(p), s_(s) {
    detail::check_ps(p, s);
    if (active.size() != grid_->size()) throw ContractError("operator: mask does not match grid");
    const auto& n = grid_->shape();
    n0_ = n[0];
    n1_ = N == 2 ? n[1] : 1;
    hN_ = grid_->cell_volume();
    compact_.assign(grid_->size(), -1);
    rows_.resize(n1_);
    for (int jy = 0; jy < n1_; ++jy) {
      int ix = 0;
      while (ix < n0_) {
        const std::size_t base = static_cast<std::size_t>(jy) * n0_;
        if (!active[base + ix]) {
          ++ix;
          continue;
        }
        Run r{ix, ix, nodes_.size()};
        while (ix < n0_ && active[base + ix]) {
          compact_[base + ix] = static_cast<long>(nodes_.size());
          nodes_.push_back(base + ix);
          ++ix;
        }
        r.x1 = ix;
        rows_[jy].push_back(r);
      }
    }
    build_kernel_table();
    if (with_kappa) {
      kappa_.resize(nodes_.size());
      for (std::size_t c = 0; c < nodes_.size(); ++c) kappa_[c] = kappa_at(nodes_[c]);
    }
  }

  /// Active set = interior nodes of the grid.
  static PairOperator on_interior(std::shared_ptr<const Grid<N>> grid, double p, double s) {
    const Mask m = grid->interior();
    return PairOperator(std::move(grid), m, p, s);
  }

  const Grid<N>& grid() const { return *grid_; }
  const std::shared_ptr<const Grid<N>>& grid_ptr() const { return grid_; }
  double p() const { return p_; }
  double s() const { return s_; }
  double node_weight() const { return hN_; }
  std::size_t unknowns() const { return nodes_.size(); }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  long compact(std::size_t node) const { return compact_[node]; }
  bool is_active(std::size_t node) const { return compact_[node] >= 0; }
  /// Lattice analog of \int_{R^N \ {0}} K over the whole lattice.
  double full_coefficient() const { return Z_; }
  double kappa(std::size_t c) const { return kappa_.at(c); }
  /// 2 h^N Z: the diagonal of the p = 2 Hessian, identical at every node.
  double linear_diagonal() const { return 2.0 * hN_ * Z_; }

  std::vector<double> gather(const Field<N>& u) const {
    std::vector<double> x(nodes_.size());
    for (std::size_t c = 0; c < nodes_.size(); ++c) x[c] = u[nodes_[c]];
    return x;
  }
  Field<N> scatter(std::span<const double> x, FieldKind kind = FieldKind::dirichlet) const {
    std::vector<double> v(grid_->size(), 0.0);
    for (std::size_t c = 0; c < nodes_.size(); ++c) v[nodes_[c]] = x[c];
    Field<N> f(grid_, kind);
    f.values() = std::move(v);
    return f;
  }

  /// Discrete J(u) for compact values x.
  double energy(std::span<const double> x) const {
    return detail::dispatch_law(p_, [&](auto law) {
      CompensatedSum pairs, ext;
      for (std::size_t c = 0; c < nodes_.size(); ++c) {
        const double e = row_energy(law, x.data(), c);
        pairs.add(e);
        ext.add(kappa_[c] * law.pw(x[c]));
      }
      const double J = (hN_ * hN_ * pairs.value() + 2.0 * hN_ * ext.value()) / p_;
      return std::isfinite(J) ? J : std::numeric_limits<double>::max();
    });
  }

  /// (-Delta)_p^s at every active node.
  void flap(std::span<const double> x, std::span<double> out) const {
    detail::dispatch_law(p_, [&](auto law) {
      for (std::size_t c = 0; c < nodes_.size(); ++c)
        out[c] = 2.0 * hN_ * row_flux(law, x.data(), x[c], nodes_[c]) + 2.0 * kappa_[c] * law.phi(x[c]);
      return 0;
    });
  }

  /// Same lattice and kernel, linear law: the operator used for p = 2 and for initialization.
  void flap_linear(std::span<const double> x, std::span<double> out) const {
    detail::LinearLaw law;
    for (std::size_t c = 0; c < nodes_.size(); ++c)
      out[c] = 2.0 * hN_ * row_flux(law, x.data(), x[c], nodes_[c]) + 2.0 * kappa_[c] * x[c];
  }

  /// J with the linear law on the same kernel (p-independent quadratic form / 2).
  double energy_linear(std::span<const double> x) const {
    detail::LinearLaw law;
    CompensatedSum pairs, ext;
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
      pairs.add(row_energy(law, x.data(), c));
      ext.add(kappa_[c] * x[c] * x[c]);
    }
    return 0.5 * (hN_ * hN_ * pairs.value() + 2.0 * hN_ * ext.value());
  }

  /// F(x) = J(x) - h^N <f, x> and its gradient g = h^N (flap(x) - f).
  double objective(std::span<const double> x, std::span<const double> load, std::span<double> g) const {
    return detail::dispatch_law(p_, [&](auto law) {
      CompensatedSum pairs, ext, lin;
      for (std::size_t c = 0; c < nodes_.size(); ++c) {
        double e = 0.0;
        const double flux = row_both(law, x.data(), c, e);
        pairs.add(e);
        ext.add(kappa_[c] * law.pw(x[c]));
        lin.add(load[c] * x[c]);
        g[c] = hN_ * (2.0 * hN_ * flux + 2.0 * kappa_[c] * law.phi(x[c]) - load[c]);
      }
      const double F = (hN_ * hN_ * pairs.value() + 2.0 * hN_ * ext.value()) / p_ - hN_ * lin.value();
      return std::isfinite(F) ? F : std::numeric_limits<double>::max();
    });
  }

  /// (-Delta)_p^s at any node of the box (inactive nodes hold 0).
  double flap_at_node(std::span<const double> x, std::size_t node) const {
    const long c = compact_[node];
    const double ui = c >= 0 ? x[c] : 0.0;
    const double kap = (c >= 0 && !kappa_.empty()) ? kappa_[c] : kappa_at(node);
    return detail::dispatch_law(p_, [&](auto law) {
      return 2.0 * hN_ * row_flux(law, x.data(), ui, node) + 2.0 * kap * law.phi(ui);
    });
  }

  /// kappa at an arbitrary node: Z - h^N * sum over active j != node of K.
  double kappa_at(std::size_t node) const {
    const auto m = grid_->multi(node);
    const int ix = m[0], iy = N == 2 ? m[N - 1] : 0;
    double acc = 0.0;
    for (int jy = 0; jy < n1_; ++jy) {
      if (rows_[jy].empty()) continue;
      const double* K = krow(jy, iy, ix);
      for (const Run& r : rows_[jy]) {
        double a = 0.0;
#pragma omp simd reduction(+ : a)
        for (int j = r.x0; j < r.x1; ++j) a += K[j];
        acc += a;
      }
    }
    return Z_ - hN_ * acc;
  }

 private:
  void build_kernel_table() {
    const double a = N + p_ * s_;
    const double h = grid_->h();
    stride_ = 2 * n0_ - 1;
    table_.assign(static_cast<std::size_t>(stride_) * n1_, 0.0);
    for (int dy = 0; dy < n1_; ++dy)
      for (int dx = -(n0_ - 1); dx <= n0_ - 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const double r = h * std::sqrt(double(dx) * dx + double(dy) * dy);
        table_[static_cast<std::size_t>(dy) * stride_ + dx + n0_ - 1] = std::pow(r, -a);
      }
    // lattice sum over 0 < |k| h <= T plus the exact tail outside the summed cells
    const double T = grid_->box_diameter();
    const int K = static_cast<int>(std::floor(T / h));
    CompensatedSum z;
    double cells = 1.0;
    if constexpr (N == 1) {
      for (int k = 1; k <= K; ++k) z.add(2.0 * std::pow(h * k, -a));
      cells += 2.0 * K;
    } else {
      const double lim = (T / h) * (T / h);
      for (int j = 0; j <= K; ++j)
        for (int i = (j == 0 ? 1 : 0); i <= K; ++i) {
          const double r2 = double(i) * i + double(j) * j;
          if (r2 > lim) break;
          // multiplicity of (±i, ±j)
          const double mult = (i == 0 || j == 0) ? 2.0 : 4.0;
          z.add(mult * std::pow(h * std::sqrt(r2), -a));
          cells += mult;
        }
    }
    // radius of the ball with the volume of the summed cells
    const double Te = N == 1 ? 0.5 * h * cells : h * std::sqrt(cells / std::numbers::pi);
    Z_ = hN_ * z.value() + sphere_measure<N>() * std::pow(Te, -p_ * s_) / (p_ * s_);
  }

  const double* krow(int jy, int iy, int ix) const {
    const int dy = std::abs(jy - iy);
    return table_.data() + static_cast<std::size_t>(dy) * stride_ + (n0_ - 1) - ix;
  }

  template <class Law>
  double row_flux(const Law& law, const double* x, double ui, std::size_t node) const {
    const auto m = grid_->multi(node);
    const int ix = m[0], iy = N == 2 ? m[N - 1] : 0;
    double acc = 0.0;
    for (int jy = 0; jy < n1_; ++jy) {
      if (rows_[jy].empty()) continue;
      const double* K = krow(jy, iy, ix);
      for (const Run& r : rows_[jy]) {
        const double* xr = x + r.c0 - r.x0;
        double a = 0.0;
#pragma omp simd reduction(+ : a)
        for (int j = r.x0; j < r.x1; ++j) a += law.phi(ui - xr[j]) * K[j];
        acc += a;
      }
    }
    return acc;
  }

  template <class Law>
  double row_energy(const Law& law, const double* x, std::size_t c) const {
    const std::size_t node = nodes_[c];
    const double ui = x[c];
    const auto m = grid_->multi(node);
    const int ix = m[0], iy = N == 2 ? m[N - 1] : 0;
    double acc = 0.0;
    for (int jy = 0; jy < n1_; ++jy) {
      if (rows_[jy].empty()) continue;
      const double* K = krow(jy, iy, ix);
      for (const Run& r : rows_[jy]) {
        const double* xr = x + r.c0 - r.x0;
        double a = 0.0;
#pragma omp simd reduction(+ : a)
        for (int j = r.x0; j < r.x1; ++j) a += law.pw(ui - xr[j]) * K[j];
        acc += a;
      }
    }
    return acc;
  }

  template <class Law>
  double row_both(const Law& law, const double* x, std::size_t c, double& energy) const {
    const std::size_t node = nodes_[c];
    const double ui = x[c];
    const auto m = grid_->multi(node);
    const int ix = m[0], iy = N == 2 ? m[N - 1] : 0;
    double acc = 0.0, en = 0.0;
    for (int jy = 0; jy < n1_; ++jy) {
      if (rows_[jy].empty()) continue;
      const double* K = krow(jy, iy, ix);
      for (const Run& r : rows_[jy]) {
        const double* xr = x + r.c0 - r.x0;
        double a = 0.0, e = 0.0;
#pragma omp simd reduction(+ : a, e)
        for (int j = r.x0; j < r.x1; ++j) {
          const double d = ui - xr[j];
          a += law.phi(d) * K[j];
          e += law.pw(d) * K[j];
        }
        acc += a;
        en += e;
      }
    }
    energy = en;
    return acc;
  }

  std::shared_ptr<const Grid<N>> grid_;
  double p_, s_;
  int n0_ = 1, n1_ = 1, stride_ = 1;
  double hN_ = 1.0;
  double Z_ = 0.0;
  std::vector<long> compact_;
  std::vector<std::size_t> nodes_;
  std::vector<std::vector<Run>> rows_;
  std::vector<double> table_;
  std::vector<double> kappa_;
};

// ---------------------------------------------------------------------------
// Field-level API

template <int N>
Mask support_mask(const Field<N>& u) {
  if (u.kind() == FieldKind::dirichlet) return u.grid().interior();
  return Mask(u.grid().size(), 1);
}

/// Discrete energy of a dirichlet field.
template <int N>
double energy(const Field<N>& u, double p, double s) {
  if (u.kind() != FieldKind::dirichlet) throw ContractError("energy: field must be of dirichlet kind");
  PairOperator<N> op(u.grid_ptr(), u.grid().interior(), p, s);
  return op.energy(op.gather(u));
}

/// h^N ((-Delta)_p^s u - f) at interior nodes, zero elsewhere.
template <int N>
Field<N> residual(const Field<N>& u, const Field<N>& f, double p, double s) {
  require_same_grid(u, f);
  if (u.kind() != FieldKind::dirichlet || f.kind() != FieldKind::dirichlet)
    throw ContractError("residual: fields must be of dirichlet kind");
  PairOperator<N> op(u.grid_ptr(), u.grid().interior(), p, s);
  const auto x = op.gather(u);
  const auto load = op.gather(f);
  std::vector<double> g(x.size());
  op.objective(x, load, g);
  return op.scatter(g);
}

namespace detail {

template <int N>
std::size_t node_of(const Grid<N>& g, const std::type_identity_t<Vec<N>>& x) {
  const auto m = g.nearest(x);
  if (!g.in_range(m)) throw PreconditionError("pointwise_flap: point outside the grid box");
  const std::size_t i = g.index(m);
  if (dist<N>(g.coord(i), x) > 1e-9 * g.h()) throw PreconditionError("pointwise_flap: field values need a grid node");
  return i;
}

template <int N>
void check_evaluation_point(const Domain<N>* domain, const std::type_identity_t<Vec<N>>& x, double h) {
  if (!domain) return;
  const double sd = domain->inner_distance(x);
  if (sd >= 0.0 && sd < 2.0 * h) throw PreconditionError("pointwise_flap: point closer than 2h to the boundary");
}

}  // namespace detail

/// Lattice evaluation of (-Delta)_p^s u at the grid node x.
template <int N>
double pointwise_flap(const Field<N>& u, const std::type_identity_t<Vec<N>>& x, double p, double s,
                      const Domain<N>* domain = nullptr) {
  detail::check_ps(p, s);
  detail::check_evaluation_point<N>(domain, x, u.grid().h());
  const std::size_t node = detail::node_of<N>(u.grid(), x);
  PairOperator<N> op(u.grid_ptr(), support_mask(u), p, s, false);
  const double v = op.flap_at_node(op.gather(u), node);
  if (!std::isfinite(v)) throw NumericError("pointwise_flap: non-finite value");
  return v;
}

namespace detail {

// \int_eps^T P(r) r^{-1-ps} dr plus the [0, eps) closure, P(r) = phi(u0-u(x+re)) + phi(u0-u(x-re)).
template <int N, class Law>
double radial_part(const Law& law, const Function<N>& u, const Vec<N>& x, double u0, const Vec<N>& e,
                   double ps, double eps, double T, const QuadratureScheme& q) {
  auto P = [&](double r) { return law.phi(u0 - u(x + r * e)) + law.phi(u0 - u(x - r * e)); };
  std::vector<double> br;
  u.ray_breaks(x, e, T, br);
  double first = T;
  for (double b : br)
    if (b > eps) first = std::min(first, b);
  for (double b : quad::geometric_breaks(eps, first, 4.0)) br.push_back(b);
  quad::Options opt{q.abs_tol, q.rel_tol, q.max_intervals};
  auto res = quad::integrate([&](double r) { return P(r) * std::pow(r, -1.0 - ps); }, eps, T, br, opt);
  double val = res.value;
  if (q.compensate) {
    const double p1 = P(eps), p2 = P(0.5 * eps);
    if (p1 * p2 > 0.0) {
      const double g = std::log2(p1 / p2);
      if (g > ps + 1e-3 && g < 8.0) val += p1 * std::pow(eps, -ps) / (g - ps);
    }
  }
  return val;
}

}  // namespace detail

/// Quadrature evaluation of (-Delta)_p^s u at an arbitrary point.
template <int N>
double pointwise_flap(const Function<N>& u, const std::type_identity_t<Vec<N>>& x, double p, double s,
                      const QuadratureScheme& scheme, const Domain<N>* domain = nullptr) {
  detail::check_ps(p, s);
  scheme.validate();
  detail::check_evaluation_point<N>(domain, x, scheme.h);
  const double ps = p * s;
  const double eps = scheme.inner_radius();
  const double T = scheme.split > 0.0 ? std::max(scheme.split, u.support_reach(x))
                                      : std::max(u.support_diameter(), u.support_reach(x));
  const double u0 = u(x);
  const double value = detail::dispatch_law(p, [&](auto law) {
    double near = 0.0;
    if constexpr (N == 1) {
      near = detail::radial_part<1>(law, u, x, u0, Vec<1>{1.0}, ps, eps, T, scheme);
    } else {
      std::vector<double> ab;
      u.angle_breaks(x, ab);
      for (int k = 1; k < 8; ++k) ab.push_back(std::numbers::pi * k / 8.0);
      quad::Options opt{10.0 * scheme.abs_tol, 10.0 * scheme.rel_tol, scheme.max_intervals};
      near = quad::integrate(
                 [&](double th) {
                   const Vec<2> e{std::cos(th), std::sin(th)};
                   return detail::radial_part<2>(law, u, x, u0, e, ps, eps, T, scheme);
                 },
                 0.0, std::numbers::pi, ab, opt)
                 .value;
    }
    double far = 0.0;
    if (scheme.far_field) far = law.phi(u0) * sphere_measure<N>() * std::pow(T, -ps) / ps;
    return 2.0 * (near + far);
  });
  if (!std::isfinite(value)) throw NumericError("pointwise_flap: non-finite value");
  return value;
}

// ---------------------------------------------------------------------------
// Tails

/// [ h^N sum_{interior nodes, |x-x0| >= R} |u|^q / |x-x0|^{N+s} ]^{1/q}
template <int N>
TailValue tail(const Field<N>& u, double q, double R, const std::type_identity_t<Vec<N>>& x0, double s) {
  if (!(q >= 1.0) || !(R > 0.0)) throw PreconditionError("tail: need q >= 1 and R > 0");
  const Grid<N>& g = u.grid();
  CompensatedSum acc;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_interior(i) || u[i] == 0.0) continue;
    const double r = dist<N>(g.coord(i), x0);
    if (r < R) continue;
    acc.add(std::pow(std::abs(u[i]), q) * std::pow(r, -N - s));
  }
  return {q, R, std::pow(g.cell_volume() * acc.value(), 1.0 / q)};
}

/// Tail of a closed-form function over Omega \ B_R(x0), by polar quadrature about x0.
template <int N>
TailValue tail(const Function<N>& u, double q, double R, const std::type_identity_t<Vec<N>>& x0,
               const Domain<N>& domain, double s, double rel_tol = 1e-11) {
  if (!(q >= 1.0) || !(R > 0.0)) throw PreconditionError("tail: need q >= 1 and R > 0");
  auto [lo, hi] = domain.bounding_box();
  double reach = 0.0;
  for (int c = 0; c < (1 << N); ++c) {
    Vec<N> corner{};
    for (int k = 0; k < N; ++k) corner[k] = (c >> k) & 1 ? hi[k] : lo[k];
    reach = std::max(reach, dist<N>(corner, x0));
  }
  if (reach <= R) return {q, R, 0.0};
  quad::Options opt{1e-15, rel_tol, 4000};
  auto radial = [&](const Vec<N>& e) {
    std::vector<double> br;
    if (auto sec = domain.line_section(x0, e)) {
      for (double t : {sec->t0, sec->t1})
        if (t > R && t < reach) br.push_back(t);
    }
    for (const auto& D : u.interfaces())
      if (auto sec = D.line_section(x0, e))
        for (double t : {sec->t0, sec->t1})
          if (t > R && t < reach) br.push_back(t);
    return quad::integrate(
               [&](double r) {
                 const Vec<N> y = x0 + r * e;
                 if (!domain.contains(y)) return 0.0;
                 return std::pow(std::abs(u(y)), q) * std::pow(r, -1.0 - s);
               },
               R, reach, br, opt)
        .value;
  };
  double total = 0.0;
  if constexpr (N == 1) {
    total = radial(Vec<1>{1.0}) + radial(Vec<1>{-1.0});
  } else {
    std::vector<double> ab;
    for (int k = 1; k < 16; ++k) ab.push_back(2.0 * std::numbers::pi * k / 16.0);
    total = quad::integrate([&](double th) { return radial(Vec<2>{std::cos(th), std::sin(th)}); }, 0.0,
                            2.0 * std::numbers::pi, ab, {1e-14, 10.0 * rel_tol, 4000})
                .value;
  }
  return {q, R, std::pow(total, 1.0 / q)};
}

// ---------------------------------------------------------------------------
// Superposition

struct SuperposeResult {
  double total = 0.0;
  double correction = 0.0;
};

/// 2 \int_V [(w(x)-v(y))^{p-1} - (w(x)-w(y))^{p-1}] / |x-y|^{N+ps} dy over the ball V.
template <int N>
double superposition_correction(const Function<N>& w, const Function<N>& v, const std::type_identity_t<Vec<N>>& vc,
                                double vr, const std::type_identity_t<Vec<N>>& x, double p, double s,
                                double rel_tol = 1e-11) {
  detail::check_ps(p, s);
  if (!(dist<N>(x, vc) > vr)) throw PreconditionError("superpose: evaluation point touches V");
  const double a = N + p * s;
  const double w0 = w(x);
  return detail::dispatch_law(p, [&](auto law) {
    auto g = [&](const Vec<N>& y) {
      return (law.phi(w0 - v(y)) - law.phi(w0 - w(y))) * std::pow(dist<N>(x, y), -a);
    };
    quad::Options opt{1e-15, rel_tol, 4000};
    if constexpr (N == 1) {
      return 2.0 * quad::integrate([&](double t) { return g(Vec<1>{t}); }, vc[0] - vr, vc[0] + vr, {vc[0]}, opt).value;
    } else {
      std::vector<double> ab;
      for (int k = 1; k < 8; ++k) ab.push_back(2.0 * std::numbers::pi * k / 8.0);
      const double I = quad::integrate(
                           [&](double th) {
                             const Vec<2> e{std::cos(th), std::sin(th)};
                             return quad::integrate([&](double r) { return g(vc + r * e) * r; }, 0.0, vr,
                                                    {0.5 * vr}, opt)
                                 .value;
                           },
                           0.0, 2.0 * std::numbers::pi, ab, {1e-15, 10.0 * rel_tol, 4000})
                           .value;
      return 2.0 * I;
    }
  });
}

template <int N>
SuperposeResult superpose(const Function<N>& w, const Function<N>& v, const std::type_identity_t<Vec<N>>& vc,
                          double vr, const std::type_identity_t<Vec<N>>& x, double p, double s,
                          const QuadratureScheme& scheme, const Domain<N>* domain = nullptr) {
  SuperposeResult r;
  r.correction = superposition_correction<N>(w, v, vc, vr, x, p, s, 0.1 * scheme.rel_tol);
  r.total = pointwise_flap<N>(w, x, p, s, scheme, domain) + r.correction;
  return r;
}

// ---------------------------------------------------------------------------
// Series S_q(a) = sum_{j>=1} (8^{a j} - 1)^q / 8^{s j}

struct SeriesValue {
  double value = 0.0;
  double remainder_bound = 0.0;
  long terms = 0;
};

inline SeriesValue series_S(double q, double alpha1, double s, long terms) {
  if (!(q >= 1.0) || !(s > 0.0 && s < 1.0) || terms < 1) throw PreconditionError("series_S: bad arguments");
  if (!(alpha1 > 0.0)) throw PreconditionError("series_S: alpha1 must be positive");
  if (alpha1 >= s / q) throw DivergenceError("series_S: alpha1 >= s/q, the series diverges");
  const double l8 = std::log(8.0);
  CompensatedSum acc;
  for (long j = 1; j <= terms; ++j) {
    const double z = alpha1 * j * l8;
    const double lg = z > 30.0 ? z + std::log1p(-std::exp(-z)) : std::log(std::expm1(z));
    const double t = std::exp(q * lg - s * j * l8);
    acc.add(t);
    if (t == 0.0 && j > 1) break;
  }
  // (8^{aj}-1)^q <= 8^{qaj}: geometric majorant of the neglected terms
  const double ratio = std::exp((q * alpha1 - s) * l8);
  const double rem = std::pow(ratio, static_cast<double>(terms + 1)) / (1.0 - ratio);
  return {acc.value(), rem, terms};
}

}  // namespace fracreg
