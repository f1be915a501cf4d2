#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fraclap/grid.hpp"
#include "fraclap/solver.hpp"
#include "fraclap/weight_families.hpp"

namespace fraclap {

// One ladder experiment: fixed s and h, geometrically growing cylinder
// half-lengths. h is held fixed across the ladder so the tables isolate the
// ell-asymptotics.
struct LadderSpec {
  double s = 0.75;
  double h = 1.0 / 16.0;
  std::vector<double> ladder = {4.0, 8.0, 16.0};
  double alpha = 0.5;
  double eps = 0.75;
  double lambda = 8.0;
  Normalization norm = Normalization::StandardFourPow;
  double half_width = 1.0;
  double solver_tol = 1e-10;

  void validate() const {
    if (!(s > 0.0) || !(s < 1.0)) {
      throw ConfigError("ladder spec: s must lie in (0,1)");
    }
    if (!(h > 0.0)) throw ConfigError("ladder spec: h must be positive");
    if (ladder.size() < 2) {
      throw ConfigError("ladder spec: need at least two ladder entries");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
      throw ConfigError("ladder spec: alpha must lie in (0,1)");
    }
    if (!detail::near_integer(2.0 * half_width / h)) {
      throw GeometryError("ladder spec: cross-section not divisible by h");
    }
    if (!detail::near_integer(1.0 / h)) {
      throw GeometryError("ladder spec: unit length not divisible by h");
    }
    double prev = 0.0;
    for (double ell : ladder) {
      if (!(ell > prev)) {
        throw ConfigError("ladder spec: ladder must be strictly increasing");
      }
      prev = ell;
      if (!detail::near_integer(ell / h)) {
        throw GeometryError("ladder spec: ell = " + std::to_string(ell) +
                            " is not grid-nested at h = " + std::to_string(h));
      }
      if (!detail::near_integer(alpha * ell / h)) {
        throw GeometryError("ladder spec: alpha*ell = " +
                            std::to_string(alpha * ell) +
                            " does not land on grid lines");
      }
    }
  }
};

struct ConvRow {
  double ell = 0.0;
  double value = 0.0;
  double local_rate = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::vector<ConvRow> rows;

  bool strictly_decreasing() const {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (!(rows[i + 1].value < rows[i].value)) return false;
    }
    return true;
  }
  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::max(m, r.value);
    return m;
  }
  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min(m, r.value);
    return m;
  }
};

// local rate on row i: log(E_i / E_{i+1}) / log(ell_{i+1} / ell_i); positive
// for decay, NaN on the last row.
inline void finalize_local_rates(ConvergenceTable& t) {
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    const auto& a = t.rows[i];
    const auto& b = t.rows[i + 1];
    if (a.value > 0.0 && b.value > 0.0 && b.ell > a.ell) {
      t.rows[i].local_rate =
          std::log(a.value / b.value) / std::log(b.ell / a.ell);
    }
  }
}

struct RateFit {
  double exponent = 0.0;
  double r2 = 1.0;
};

// Least-squares slope of log E against log ell.
inline RateFit fit_rate(const ConvergenceTable& t) {
  if (t.rows.size() < 3) {
    throw ConfigError("fit_rate: need at least 3 rows");
  }
  const std::size_t n = t.rows.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t.rows[i].value > 0.0)) {
      throw ConfigError("fit_rate: nonpositive table entry");
    }
    xs[i] = std::log(t.rows[i].ell);
    ys[i] = std::log(t.rows[i].value);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.exponent = sxy / sxx;
  if (syy <= 1e-28) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = my + fit.exponent * (xs[i] - mx);
      ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

// Weighted nodal quadrature sum of u^2 * weight_fn(x1) over a mask.
template <typename WeightFn>
double weighted_l2_sq(const GridFunction& u, const SubdomainMask& mask,
                      const WeightFn& weight_fn) {
  mask.validate_alignment(u.grid);
  double s = 0.0;
  for (int i = 0; i < u.grid.n1(); ++i) {
    const double wx = weight_fn(u.grid.axis(0).node(i));
    for (int j = 0; j < u.grid.n2(); ++j) {
      const double w = mask.node_weight(u.grid, i, j);
      if (w != 0.0) {
        const double x = u.v[u.grid.index(i, j)];
        s += w * wx * x * x;
      }
    }
  }
  return s;
}

struct CrossSectionResult {
  ConvergenceTable error_table;   // E(ell) = |u_ell - u_inf|^2 over Omega_{alpha ell}
  ConvergenceTable omega1_table;  // same difference restricted to Omega_1
  ConvergenceTable growth_table;  // G(ell) = |u_ell|^2 over Omega_ell / ell
  GridFunction u_inf;
};

namespace detail {

inline GridFunction solve_cross_section(const LadderSpec& spec,
                                        const GridFunction& f_profile) {
  const UniformGrid omega = build_grid(CrossSection{spec.half_width}, spec.h);
  if (!f_profile.grid.same_layout(omega)) {
    throw GeometryError(
        "cross-section force profile does not live on the omega grid at the "
        "requested h");
  }
  return solve_dirichlet(omega, FracOrder(spec.s), f_profile, spec.norm,
                         spec.solver_tol)
      .solution;
}

inline GridFunction solve_on_cylinder(const LadderSpec& spec,
                                      const GridFunction& f2d) {
  const FractionalOperator op(
      assemble_weights(f2d.grid, FracOrder(spec.s), spec.norm));
  SolverOptions opts;
  opts.tol = spec.solver_tol;
  return solve_dirichlet(op, f2d, opts).solution;
}

}  // namespace detail

// Theorem-1.2 ladder: cross-section force f(X2), difference against the
// extruded cross-section solution measured over Omega_{alpha ell}.
inline CrossSectionResult run_cross_section(const LadderSpec& spec,
                                            const GridFunction& f_profile) {
  spec.validate();
  CrossSectionResult res;
  res.u_inf = detail::solve_cross_section(spec, f_profile);

  for (double ell : spec.ladder) {
    const UniformGrid grid = build_grid(
        CylinderDomain{ell, CrossSection{spec.half_width}}, spec.h);
    const GridFunction f2d = extrude(f_profile, grid);
    const GridFunction u = detail::solve_on_cylinder(spec, f2d);
    const GridFunction uinf2d = extrude(res.u_inf, grid);
    GridFunction v = u;
    for (std::size_t k = 0; k < v.v.size(); ++k) v.v[k] -= uinf2d.v[k];

    res.error_table.rows.push_back(
        {ell,
         l2_norm_sq_on(v, SubdomainMask::cylinder(spec.alpha * ell,
                                                  spec.half_width)),
         std::numeric_limits<double>::quiet_NaN()});
    res.omega1_table.rows.push_back(
        {ell, l2_norm_sq_on(v, SubdomainMask::cylinder(1.0, spec.half_width)),
         std::numeric_limits<double>::quiet_NaN()});
    res.growth_table.rows.push_back(
        {ell,
         l2_norm_sq_on(u, SubdomainMask::cylinder(ell, spec.half_width)) / ell,
         std::numeric_limits<double>::quiet_NaN()});
  }
  finalize_local_rates(res.error_table);
  finalize_local_rates(res.omega1_table);
  finalize_local_rates(res.growth_table);
  return res;
}

// Theorem-1.3 ladder: force is the indicator of Omega_ell minus
// Omega_{ell-1} (norm 2, independent of ell); D(ell) = |u_ell|^2 over
// Omega_1.
inline ConvergenceTable run_far_support(const LadderSpec& spec) {
  spec.validate();
  ConvergenceTable table;
  for (double ell : spec.ladder) {
    if (!(ell > 2.0)) {
      throw ConfigError("far-support ladder requires ell > 2");
    }
    const UniformGrid grid = build_grid(
        CylinderDomain{ell, CrossSection{spec.half_width}}, spec.h);
    const double edge = ell - 1.0 - 1e-9 * spec.h;
    const GridFunction f = GridFunction::sample(
        grid,
        [edge](double x1, double) { return std::abs(x1) >= edge ? 1.0 : 0.0; });
    const GridFunction u = detail::solve_on_cylinder(spec, f);
    table.rows.push_back(
        {ell, l2_norm_sq_on(u, SubdomainMask::cylinder(1.0, spec.half_width)),
         std::numeric_limits<double>::quiet_NaN()});
  }
  finalize_local_rates(table);
  return table;
}

// Lemma-3.5 ladder: the growth table of the cross-section run.
inline ConvergenceTable run_linear_growth(const LadderSpec& spec,
                                          const GridFunction& f_profile) {
  return run_cross_section(spec, f_profile).growth_table;
}

struct ExtrusionRow {
  double h = 0.0;
  double residual = 0.0;
};

// Lemma-3.2 consistency: apply the 2D operator to the extruded cross-section
// solution (exterior data included through the lifting arithmetic; no solve)
// and measure the interior residual against f(X2) over Omega_{ell/2}.
inline std::vector<ExtrusionRow> extrusion_residual(
    FracOrder s, double ell, const std::vector<double>& h_ladder,
    const std::function<double(double)>& f_x2 = [](double) { return 1.0; },
    Normalization norm = Normalization::StandardFourPow,
    double half_width = 1.0, double solver_tol = 1e-12) {
  if (!(ell >= 2.0)) throw ConfigError("extrusion_residual: ell must be >= 2");
  std::vector<ExtrusionRow> rows;
  for (double h : h_ladder) {
    const UniformGrid omega = build_grid(CrossSection{half_width}, h);
    const GridFunction f1d =
        GridFunction::sample(omega, [&](double x2) { return f_x2(x2); });
    const GridFunction u_inf =
        solve_dirichlet(omega, s, f1d, norm, solver_tol).solution;

    // The exterior data lives on a window that widens under refinement, so
    // the O(W^{-2-2s}) truncation of the extruded field vanishes together
    // with h.
    const double L = ell + 4.0 / h;
    const UniformGrid enc =
        build_grid(CylinderDomain{L, CrossSection{half_width}}, h);
    const GridFunction g_ext = extrude(u_inf, enc);

    const UniformGrid eval_grid = build_grid(
        CylinderDomain{0.5 * ell, CrossSection{half_width}}, h);
    const GridFunction f_eval = extrude(f1d, eval_grid);

    FractionalOperator op(assemble_weights(enc, s, norm));
    const GridFunction b = lifted_rhs(op, f_eval, g_ext);
    double max_res = 0.0;
    for (double x : b.v) max_res = std::max(max_res, std::abs(x));
    rows.push_back({h, max_res});
  }
  return rows;
}

// Proposition-5.1 ladder: weighted ratio R(ell) with the x1-decaying weight
// rho_{eps,lambda}; the far-support force keeps the denominator away from
// zero.
inline ConvergenceTable weighted_estimate_check(const LadderSpec& spec) {
  spec.validate();
  if (!(spec.eps > 0.0) || !(spec.eps < 2.0 * spec.s)) {
    throw ConfigError("weighted check requires 0 < eps < 2s");
  }
  const RhoEpsLambda rho(spec.eps, spec.lambda);
  ConvergenceTable table;
  for (double ell : spec.ladder) {
    if (!(ell > 2.0)) {
      throw ConfigError("weighted ladder requires ell > 2");
    }
    const UniformGrid grid = build_grid(
        CylinderDomain{ell, CrossSection{spec.half_width}}, spec.h);
    const double edge = ell - 1.0 - 1e-9 * spec.h;
    const GridFunction f = GridFunction::sample(
        grid,
        [edge](double x1, double) { return std::abs(x1) >= edge ? 1.0 : 0.0; });
    const GridFunction u = detail::solve_on_cylinder(spec, f);
    const SubdomainMask full = SubdomainMask::cylinder(ell, spec.half_width);
    const double num = weighted_l2_sq(u, full, rho);
    const double den = weighted_l2_sq(f, full, rho);
    table.rows.push_back({ell, num / den,
                          std::numeric_limits<double>::quiet_NaN()});
  }
  finalize_local_rates(table);
  return table;
}

// Appendix transformation w_ell = u_ell - u_inf + psi_ell u_inf as a
// diagnostic field; grouped as u - (1 - psi) u_inf.
inline GridFunction transformation_field(const GridFunction& u_ell,
                                         const GridFunction& u_inf_2d,
                                         const SmoothPsi& psi) {
  if (!u_ell.grid.same_layout(u_inf_2d.grid)) {
    throw GeometryError("transformation_field: grid mismatch");
  }
  GridFunction w = u_ell;
  for (int i = 0; i < w.grid.n1(); ++i) {
    const double p = 1.0 - psi(w.grid.axis(0).node(i));
    for (int j = 0; j < w.grid.n2(); ++j) {
      w.v[w.grid.index(i, j)] -= p * u_inf_2d.v[w.grid.index(i, j)];
    }
  }
  return w;
}

}  // namespace fraclap
