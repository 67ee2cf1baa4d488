#pragma once

// Binary erosion / dilation / opening of grid masks by a discrete disc.

#include <cmath>
#include <limits>
#include <vector>

#include "fracreg/core.hpp"
#include "fracreg/geometry.hpp"
#include "fracreg/grid.hpp"

namespace fracreg {

/// Omega ∩ B_outer(center) minus the closed ball of radius inner; outer = inf means no outer cut.
template <int N>
struct ParentSet {
  Vec<N> center{};
  double outer = std::numeric_limits<double>::infinity();
  double inner = 0.0;

  bool contains(const Domain<N>& domain, const Vec<N>& x) const {
    if (!domain.contains(x)) return false;
    const double r = dist<N>(x, center);
    return r < outer && (inner <= 0.0 || r > inner);
  }
};

template <int N>
struct OpenedRegion {
  ParentSet<N> parent;
  double radius = 0.0;
  Mask parent_mask;
  Mask occupancy;
};

namespace detail {

template <int N>
std::vector<std::array<int, N>> disc_offsets(double r, double h) {
  std::vector<std::array<int, N>> out;
  const int K = static_cast<int>(std::floor(r / h + 1e-12));
  const double r2 = (r / h) * (r / h) * (1.0 + 1e-12);
  if constexpr (N == 1) {
    for (int i = -K; i <= K; ++i) out.push_back({i});
  } else {
    for (int j = -K; j <= K; ++j)
      for (int i = -K; i <= K; ++i)
        if (double(i) * i + double(j) * j <= r2) out.push_back({i, j});
  }
  return out;
}

}  // namespace detail

/// Nodes whose whole disc of radius r lies in m (out-of-range nodes count as empty).
template <int N>
Mask erode(const Grid<N>& g, const Mask& m, double r) {
  const auto off = detail::disc_offsets<N>(r, g.h());
  Mask out(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    const auto c = g.multi(i);
    bool keep = true;
    for (const auto& o : off) {
      std::array<int, N> q{};
      for (int k = 0; k < N; ++k) q[k] = c[k] + o[k];
      if (!g.in_range(q) || !m[g.index(q)]) {
        keep = false;
        break;
      }
    }
    out[i] = keep;
  }
  return out;
}

template <int N>
Mask dilate(const Grid<N>& g, const Mask& m, double r) {
  const auto off = detail::disc_offsets<N>(r, g.h());
  Mask out(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    const auto c = g.multi(i);
    for (const auto& o : off) {
      std::array<int, N> q{};
      for (int k = 0; k < N; ++k) q[k] = c[k] + o[k];
      if (g.in_range(q)) out[g.index(q)] = 1;
    }
  }
  return out;
}

template <int N>
Mask open_mask(const Grid<N>& g, const Mask& m, double r) {
  return dilate(g, erode(g, m, r), r);
}

/// Union of all discrete discs of radius r contained in the parent set.
template <int N>
OpenedRegion<N> opened_region(const Domain<N>& domain, const ParentSet<N>& parent, double radius,
                              const Grid<N>& grid) {
  if (!(radius >= 2.0 * grid.h() * (1.0 - 1e-12)))
    throw PreconditionError("opened_region: structuring radius must be at least 2h");
  OpenedRegion<N> reg;
  reg.parent = parent;
  reg.radius = radius;
  reg.parent_mask = mask_where(grid, [&](std::size_t, const Vec<N>& x) { return parent.contains(domain, x); });
  reg.occupancy = open_mask(grid, reg.parent_mask, radius);
  if (mask_count(reg.occupancy) == 0) throw GeometryError("opened_region: opening is empty");
  return reg;
}

}  // namespace fracreg
