#pragma once

// Uniform lattice covering a domain, node masks and nodal fields.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/geometry.hpp"

namespace fracreg {

using Mask = std::vector<std::uint8_t>;

/// Uniform Cartesian node set. Node (i0,i1) sits at lo + h*(i0,i1); the first axis runs fastest.
template <int N>
class Grid {
 public:
  Grid(Vec<N> lo, double h, std::array<int, N> n) : lo_(lo), h_(h), n_(n) {
    if (!(h > 0.0)) throw PreconditionError("grid: spacing must be positive");
    for (int k = 0; k < N; ++k)
      if (n[k] < 1) throw PreconditionError("grid: empty axis");
    interior_.assign(size(), 0);
  }

  /// Grid whose center node is the domain center, with at least `margin` exterior layers.
  static Grid around(const Domain<N>& domain, double h, int margin = 2) {
    if (margin < 2) throw PreconditionError("grid: margin must be at least 2 nodes");
    auto [lo, hi] = domain.bounding_box();
    std::array<int, N> n{};
    Vec<N> start{};
    for (int k = 0; k < N; ++k) {
      const double half = 0.5 * (hi[k] - lo[k]);
      const int K = static_cast<int>(std::ceil(half / h - 1e-9)) + margin;
      n[k] = 2 * K + 1;
      start[k] = domain.center()[k] - K * h;
    }
    Grid g(start, h, n);
    g.mark_interior(domain);
    return g;
  }

  double h() const { return h_; }
  const Vec<N>& lo() const { return lo_; }
  const std::array<int, N>& shape() const { return n_; }
  std::size_t size() const {
    std::size_t m = 1;
    for (int k = 0; k < N; ++k) m *= static_cast<std::size_t>(n_[k]);
    return m;
  }
  /// h^N, the node weight.
  double cell_volume() const { return std::pow(h_, N); }

  Vec<N> hi() const {
    Vec<N> r{};
    for (int k = 0; k < N; ++k) r[k] = lo_[k] + (n_[k] - 1) * h_;
    return r;
  }
  double box_diameter() const {
    const Vec<N> d = hi() - lo_;
    return norm<N>(d);
  }

  std::size_t index(const std::array<int, N>& m) const {
    if constexpr (N == 1) return static_cast<std::size_t>(m[0]);
    else return static_cast<std::size_t>(m[0]) + static_cast<std::size_t>(n_[0]) * m[1];
  }
  std::array<int, N> multi(std::size_t i) const {
    if constexpr (N == 1) return {static_cast<int>(i)};
    else return {static_cast<int>(i % n_[0]), static_cast<int>(i / n_[0])};
  }
  Vec<N> coord(std::size_t i) const {
    const auto m = multi(i);
    Vec<N> x{};
    for (int k = 0; k < N; ++k) x[k] = lo_[k] + m[k] * h_;
    return x;
  }
  bool in_range(const std::array<int, N>& m) const {
    for (int k = 0; k < N; ++k)
      if (m[k] < 0 || m[k] >= n_[k]) return false;
    return true;
  }
  /// Nearest node to x (may be out of range).
  std::array<int, N> nearest(const Vec<N>& x) const {
    std::array<int, N> m{};
    for (int k = 0; k < N; ++k) m[k] = static_cast<int>(std::lround((x[k] - lo_[k]) / h_));
    return m;
  }

  void mark_interior(const Domain<N>& domain) {
    for (std::size_t i = 0; i < size(); ++i) interior_[i] = domain.contains(coord(i)) ? 1 : 0;
    has_domain_ = true;
  }
  const Mask& interior() const { return interior_; }
  bool is_interior(std::size_t i) const { return interior_[i] != 0; }
  std::size_t interior_count() const {
    std::size_t c = 0;
    for (auto v : interior_) c += v;
    return c;
  }
  bool has_domain() const { return has_domain_; }

  /// Same lattice shape with every length multiplied by t.
  Grid scaled(double t) const {
    Grid g(t * lo_, t * h_, n_);
    g.interior_ = interior_;
    g.has_domain_ = has_domain_;
    return g;
  }

  bool same_lattice(const Grid& o) const { return lo_ == o.lo_ && h_ == o.h_ && n_ == o.n_; }

 private:
  Vec<N> lo_;
  double h_;
  std::array<int, N> n_;
  Mask interior_;
  bool has_domain_ = false;
};

enum class FieldKind { dirichlet, free };

/// Nodal values on a grid.
template <int N>
class Field {
 public:
  Field(std::shared_ptr<const Grid<N>> grid, FieldKind kind = FieldKind::dirichlet)
      : grid_(std::move(grid)), values_(grid_->size(), 0.0), kind_(kind) {}
  Field(std::shared_ptr<const Grid<N>> grid, std::vector<double> values, FieldKind kind)
      : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
    if (values_.size() != grid_->size()) throw ContractError("field: value count does not match grid");
    if (kind_ == FieldKind::dirichlet) enforce_dirichlet();
  }

  /// Samples f at every node; dirichlet kind zeroes exterior nodes.
  template <class F>
  static Field sample(std::shared_ptr<const Grid<N>> grid, F&& f, FieldKind kind = FieldKind::dirichlet) {
    Field u(grid, kind);
    for (std::size_t i = 0; i < grid->size(); ++i)
      if (kind == FieldKind::free || grid->is_interior(i)) u.values_[i] = f(grid->coord(i));
    return u;
  }

  const Grid<N>& grid() const { return *grid_; }
  const std::shared_ptr<const Grid<N>>& grid_ptr() const { return grid_; }
  FieldKind kind() const { return kind_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  void enforce_dirichlet() {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!grid_->is_interior(i)) values_[i] = 0.0;
  }
  /// True when every exterior node holds 0.
  bool satisfies_dirichlet() const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!grid_->is_interior(i) && values_[i] != 0.0) return false;
    return true;
  }

  Field scaled(double t) const {
    Field r = *this;
    for (double& v : r.values_) v *= t;
    return r;
  }

  double sup_abs() const { return max_abs(values_); }

  /// Multilinear interpolation; zero outside the box.
  double interpolate(const Vec<N>& x) const {
    const Grid<N>& g = *grid_;
    std::array<int, N> base{};
    Vec<N> frac{};
    for (int k = 0; k < N; ++k) {
      const double t = (x[k] - g.lo()[k]) / g.h();
      if (t < 0.0 || t > g.shape()[k] - 1) return 0.0;
      base[k] = std::min(static_cast<int>(std::floor(t)), g.shape()[k] - 2);
      if (g.shape()[k] == 1) base[k] = 0;
      frac[k] = t - base[k];
    }
    if constexpr (N == 1) {
      return (1.0 - frac[0]) * values_[base[0]] + frac[0] * values_[base[0] + 1];
    } else {
      auto v = [&](int a, int b) { return values_[g.index({base[0] + a, base[1] + b})]; };
      return (1.0 - frac[0]) * (1.0 - frac[1]) * v(0, 0) + frac[0] * (1.0 - frac[1]) * v(1, 0) +
             (1.0 - frac[0]) * frac[1] * v(0, 1) + frac[0] * frac[1] * v(1, 1);
    }
  }

 private:
  std::shared_ptr<const Grid<N>> grid_;
  std::vector<double> values_;
  FieldKind kind_;
};

template <int N>
void require_same_grid(const Field<N>& a, const Field<N>& b) {
  if (&a.grid() != &b.grid() && !a.grid().same_lattice(b.grid()))
    throw ContractError("fields live on different grids");
}

/// Nodes whose coordinates satisfy pred.
template <int N, class P>
Mask mask_where(const Grid<N>& g, P&& pred) {
  Mask m(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = pred(i, g.coord(i)) ? 1 : 0;
  return m;
}

inline std::size_t mask_count(const Mask& m) {
  std::size_t c = 0;
  for (auto v : m) c += v;
  return c;
}

}  // namespace fracreg
