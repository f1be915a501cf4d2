#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap {

// Cross-section omega = (-half_width, half_width), one dimension below the
// cylinder.
struct CrossSection {
  double half_width = 1.0;
};

// Omega_ell = (-ell, ell) x omega.
struct CylinderDomain {
  double ell = 1.0;
  CrossSection cross_section{};
};

namespace detail {
inline bool near_integer(double x, double tol = 1e-9) {
  return std::abs(x - std::round(x)) <= tol;
}
}  // namespace detail

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;
  int cells = 0;

  int interior_nodes() const noexcept { return cells - 1; }
  double node(int i) const noexcept { return lo + (i + 1) * h; }
  // Interior index of the lattice coordinate x, if x is an interior node.
  std::optional<int> interior_index(double x) const {
    const double t = (x - lo) / h;
    if (!detail::near_integer(t)) return std::nullopt;
    const int k = static_cast<int>(std::llround(t));
    if (k < 1 || k > cells - 1) return std::nullopt;
    return k - 1;
  }
  bool on_lattice(double x) const { return detail::near_integer((x - lo) / h); }
};

inline GridAxis make_axis(double lo, double hi, double h,
                          const std::string& name) {
  if (!(h > 0.0) || !(hi > lo)) {
    throw GeometryError("axis " + name + ": requires hi > lo and h > 0");
  }
  const double ratio = (hi - lo) / h;
  if (!detail::near_integer(ratio)) {
    throw GeometryError("axis " + name + ": extent " + std::to_string(hi - lo) +
                        " is not an integer multiple of h = " +
                        std::to_string(h));
  }
  const int cells = static_cast<int>(std::llround(ratio));
  if (cells < 2) {
    throw GeometryError("axis " + name + ": fewer than two cells");
  }
  return GridAxis{lo, hi, h, cells};
}

// Uniform tensor grid over a box, carrying interior nodes only. Boundary and
// exterior values of a grid function are zero by definition.
class UniformGrid {
public:
  static UniformGrid line(double lo, double hi, double h) {
    UniformGrid g;
    g.dim_ = 1;
    g.ax_[0] = make_axis(lo, hi, h, "x1");
    return g;
  }
  static UniformGrid box(double lo1, double hi1, double lo2, double hi2,
                         double h) {
    UniformGrid g;
    g.dim_ = 2;
    g.ax_[0] = make_axis(lo1, hi1, h, "x1");
    g.ax_[1] = make_axis(lo2, hi2, h, "x2");
    return g;
  }

  int dim() const noexcept { return dim_; }
  const GridAxis& axis(int a) const { return ax_[static_cast<std::size_t>(a)]; }
  double h() const noexcept { return ax_[0].h; }
  int n1() const noexcept { return ax_[0].interior_nodes(); }
  int n2() const noexcept { return dim_ == 2 ? ax_[1].interior_nodes() : 1; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n1()) * static_cast<std::size_t>(n2());
  }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n2()) +
           static_cast<std::size_t>(j);
  }
  double cell_measure() const noexcept {
    return dim_ == 2 ? h() * h() : h();
  }
  bool same_layout(const UniformGrid& o) const noexcept {
    return dim_ == o.dim_ && n1() == o.n1() && n2() == o.n2() &&
           std::abs(ax_[0].lo - o.ax_[0].lo) <= 1e-12 &&
           std::abs(h() - o.h()) <= 1e-14;
  }

private:
  int dim_ = 1;
  std::array<GridAxis, 2> ax_{};
};

inline UniformGrid build_grid(const CylinderDomain& dom, double h) {
  return UniformGrid::box(-dom.ell, dom.ell, -dom.cross_section.half_width,
                          dom.cross_section.half_width, h);
}

inline UniformGrid build_grid(const CrossSection& cs, double h) {
  return UniformGrid::line(-cs.half_width, cs.half_width, h);
}

// Values over the interior nodes of a grid; implicitly 0 at the boundary and
// everywhere outside.
struct GridFunction {
  UniformGrid grid;
  std::vector<double> v;

  static GridFunction zeros(const UniformGrid& g) {
    return {g, std::vector<double>(g.size(), 0.0)};
  }
  // Accepts f(x1) on 1D grids and f(x1, x2) on 2D grids.
  template <typename F>
  static GridFunction sample(const UniformGrid& g, const F& f) {
    GridFunction u = zeros(g);
    for (int i = 0; i < g.n1(); ++i) {
      const double x1 = g.axis(0).node(i);
      if constexpr (std::is_invocable_r_v<double, F, double, double>) {
        if (g.dim() != 2) {
          throw GeometryError("sample: two-argument functor on a 1D grid");
        }
        for (int j = 0; j < g.n2(); ++j) {
          u.v[g.index(i, j)] = f(x1, g.axis(1).node(j));
        }
      } else {
        if (g.dim() != 1) {
          throw GeometryError("sample: one-argument functor on a 2D grid");
        }
        u.v[g.index(i, 0)] = f(x1);
      }
    }
    return u;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

// Plain nodal inner product with the uniform cell measure; boundary nodes
// carry value zero, so this is the trapezoid-consistent product for interior
// data.
inline double inner_product_h(const GridFunction& a, const GridFunction& b) {
  if (!a.grid.same_layout(b.grid)) {
    throw GeometryError("inner_product_h: grid mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
  return s * a.grid.cell_measure();
}

// Axis-aligned box; for 1D masks only the first axis is used.
struct MaskBox {
  double lo1 = 0.0, hi1 = 0.0;
  double lo2 = 0.0, hi2 = 0.0;
};

// Union of closed axis-aligned boxes used as an L^2 quadrature region.
// Trapezoid weights: a node on a box face gets half weight per touching
// axis, which makes the quadrature exactly additive over boxes that share
// only faces.
class SubdomainMask {
public:
  static SubdomainMask interval(double a, double b) {
    SubdomainMask m;
    m.dim_ = 1;
    m.boxes_.push_back({a, b, 0.0, 0.0});
    return m;
  }
  static SubdomainMask box(double a1, double b1, double a2, double b2) {
    SubdomainMask m;
    m.dim_ = 2;
    m.boxes_.push_back({a1, b1, a2, b2});
    return m;
  }
  // Omega_a = [-a,a] x [-hw,hw] as a closed region.
  static SubdomainMask cylinder(double a, double half_width) {
    return box(-a, a, -half_width, half_width);
  }
  // Omega_ell minus Omega_{ell-1}: the two unit slabs at the ends.
  static SubdomainMask ring(double ell, double half_width) {
    if (!(ell > 1.0)) {
      throw GeometryError("ring mask requires ell > 1");
    }
    SubdomainMask m;
    m.dim_ = 2;
    m.boxes_.push_back({-ell, -(ell - 1.0), -half_width, half_width});
    m.boxes_.push_back({ell - 1.0, ell, -half_width, half_width});
    return m;
  }
  static SubdomainMask ring1d(double ell) {
    if (!(ell > 1.0)) {
      throw GeometryError("ring mask requires ell > 1");
    }
    SubdomainMask m;
    m.dim_ = 1;
    m.boxes_.push_back({-ell, -(ell - 1.0), 0.0, 0.0});
    m.boxes_.push_back({ell - 1.0, ell, 0.0, 0.0});
    return m;
  }

  int dim() const noexcept { return dim_; }
  const std::vector<MaskBox>& boxes() const noexcept { return boxes_; }

  void validate_alignment(const UniformGrid& g) const {
    if (g.dim() != dim_) {
      throw GeometryError("mask/grid dimension mismatch");
    }
    for (const auto& b : boxes_) {
      if (!g.axis(0).on_lattice(b.lo1) || !g.axis(0).on_lattice(b.hi1)) {
        throw GeometryError("mask edge not aligned to grid lines on axis x1");
      }
      if (dim_ == 2 && (!g.axis(1).on_lattice(b.lo2) ||
                        !g.axis(1).on_lattice(b.hi2))) {
        throw GeometryError("mask edge not aligned to grid lines on axis x2");
      }
    }
  }

  // Quadrature weight of the node (product over axes of h, halved on faces),
  // summed over boxes.
  double node_weight(const UniformGrid& g, int i, int j) const {
    const double tol = 1e-9 * g.h();
    double w = 0.0;
    const double x1 = g.axis(0).node(i);
    const double x2 = g.dim() == 2 ? g.axis(1).node(j) : 0.0;
    for (const auto& b : boxes_) {
      double wb = axis_weight(x1, b.lo1, b.hi1, g.h(), tol);
      if (wb == 0.0) continue;
      if (dim_ == 2) {
        const double w2 = axis_weight(x2, b.lo2, b.hi2, g.h(), tol);
        wb *= w2;
      }
      w += wb;
    }
    return w;
  }

private:
  static double axis_weight(double x, double lo, double hi, double h,
                            double tol) {
    if (x < lo - tol || x > hi + tol) return 0.0;
    const bool on_face = std::abs(x - lo) <= tol || std::abs(x - hi) <= tol;
    return on_face ? 0.5 * h : h;
  }

  int dim_ = 1;
  std::vector<MaskBox> boxes_;
};

// Trapezoid quadrature of u^2 over the masked region.
inline double l2_norm_sq_on(const GridFunction& u, const SubdomainMask& mask) {
  mask.validate_alignment(u.grid);
  double s = 0.0;
  for (int i = 0; i < u.grid.n1(); ++i) {
    for (int j = 0; j < u.grid.n2(); ++j) {
      const double w = mask.node_weight(u.grid, i, j);
      if (w != 0.0) {
        const double x = u.v[u.grid.index(i, j)];
        s += w * x * x;
      }
    }
  }
  return s;
}

namespace detail {
// Offset of src interior node 0 relative to tgt interior node 0, provided the
// lattices share spacing and phase.
inline int nested_axis_offset(const GridAxis& src, const GridAxis& tgt,
                              const std::string& name) {
  if (std::abs(src.h - tgt.h) > 1e-12 * src.h) {
    throw GeometryError("grids not nested: spacing differs on axis " + name);
  }
  const double t = (src.lo - tgt.lo) / src.h;
  if (!near_integer(t)) {
    throw GeometryError("grids not nested: lattice phase differs on axis " +
                        name);
  }
  return static_cast<int>(std::llround(t));
}
}  // namespace detail

// Copies values at shared nodes, zero elsewhere. Works in both directions
// (restriction and extension) for nested lattices.
inline GridFunction restrict_extend(const GridFunction& u,
                                    const UniformGrid& target) {
  if (u.grid.dim() != target.dim()) {
    throw GeometryError("restrict_extend: dimension mismatch");
  }
  const int off1 = detail::nested_axis_offset(u.grid.axis(0), target.axis(0), "x1");
  const int off2 = u.grid.dim() == 2
                       ? detail::nested_axis_offset(u.grid.axis(1),
                                                    target.axis(1), "x2")
                       : 0;
  GridFunction out = GridFunction::zeros(target);
  for (int i = 0; i < u.grid.n1(); ++i) {
    const int ti = i + off1;
    if (ti < 0 || ti >= target.n1()) continue;
    for (int j = 0; j < u.grid.n2(); ++j) {
      const int tj = j + off2;
      if (tj < 0 || tj >= target.n2()) continue;
      out.v[target.index(ti, tj)] = u.v[u.grid.index(i, j)];
    }
  }
  return out;
}

// Extends a cross-section profile g(x2) constantly in x1 over a 2D grid:
// u(x1, x2) = g(x2), with zero extension where the profile grid ends.
inline GridFunction extrude(const GridFunction& profile,
                            const UniformGrid& grid2d) {
  if (profile.grid.dim() != 1 || grid2d.dim() != 2) {
    throw GeometryError("extrude: expects a 1D profile and a 2D grid");
  }
  const int off =
      detail::nested_axis_offset(profile.grid.axis(0), grid2d.axis(1), "x2");
  GridFunction out = GridFunction::zeros(grid2d);
  for (int j = 0; j < grid2d.n2(); ++j) {
    const int pj = j - off;
    if (pj < 0 || pj >= profile.grid.n1()) continue;
    const double val = profile.v[static_cast<std::size_t>(pj)];
    for (int i = 0; i < grid2d.n1(); ++i) {
      out.v[grid2d.index(i, j)] = val;
    }
  }
  return out;
}

}  // namespace fraclap
