#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "fraclap/kernel.hpp"

namespace fraclap {

struct SolveReport {
  GridFunction solution;
  int iterations = 0;
  double residual = 0.0;  // true relative residual, recomputed after the solve
  double seconds = 0.0;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 0;  // 0 -> 50 * sqrt(N)
  MatvecBackend backend = MatvecBackend::Auto;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct PcgResult {
  std::vector<double> x;
  int iterations = 0;
  std::vector<double> history;  // relative recurrence residual per iteration
};

// Preconditioned CG with the constant Jacobi diagonal of the operator.
template <typename ApplyFn>
PcgResult pcg(const ApplyFn& apply, const std::vector<double>& b, double diag,
              double tol, int cap, const std::vector<double>* x0 = nullptr) {
  const std::size_t n = b.size();
  PcgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return res;

  std::vector<double> r = b, z(n), p(n), q(n);
  if (x0 != nullptr && x0->size() == n) {
    res.x = *x0;
    apply(res.x, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
  }
  const double inv_diag = 1.0 / diag;
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] * inv_diag;
  p = z;
  double rz = dot(r, z);
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= tol * bnorm) return res;

  for (int it = 1; it <= cap; ++it) {
    apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t k = 0; k < n; ++k) {
      res.x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it;
    res.history.push_back(rnorm / bnorm);
    if (rnorm <= tol * bnorm) return res;
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] * inv_diag;
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw SolverError(
      "conjugate gradient did not reach tol " + std::to_string(tol) + " in " +
          std::to_string(cap) + " iterations (residual " +
          std::to_string(res.history.empty() ? 1.0 : res.history.back()) + ")",
      res.history);
}

inline int default_cap(std::size_t n) {
  return static_cast<int>(50.0 * std::sqrt(static_cast<double>(n))) + 20;
}

}  // namespace detail

// Homogeneous exterior-Dirichlet solve A u = f on the interior nodes.
inline SolveReport solve_dirichlet(const FractionalOperator& op,
                                   const GridFunction& f,
                                   SolverOptions opts = {}) {
  if (!f.grid.same_layout(op.weights().grid)) {
    throw GeometryError("solve_dirichlet: f grid does not match the operator");
  }
  if (!(opts.tol > 0.0) || opts.tol > 1e-4) {
    throw ConfigError("solve_dirichlet: tol must lie in (0, 1e-4]");
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto apply = [&op](const std::vector<double>& in, std::vector<double>& out) {
    op.apply(in, out);
  };
  const int cap = opts.max_iterations > 0 ? opts.max_iterations
                                          : detail::default_cap(f.v.size());
  auto res = detail::pcg(apply, f.v, op.weights().diagonal(), opts.tol, cap);

  SolveReport rep;
  rep.solution = GridFunction{f.grid, std::move(res.x)};
  rep.iterations = res.iterations;
  std::vector<double> au;
  op.apply(rep.solution.v, au);
  double rr = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    const double d = f.v[k] - au[k];
    rr += d * d;
    bb += f.v[k] * f.v[k];
  }
  rep.residual = bb > 0.0 ? std::sqrt(rr / bb) : 0.0;
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

inline SolveReport solve_dirichlet(const UniformGrid& grid, FracOrder s,
                                   const GridFunction& f, Normalization norm,
                                   double tol = 1e-10) {
  FractionalOperator op(assemble_weights(grid, s, norm));
  SolverOptions opts;
  opts.tol = tol;
  return solve_dirichlet(op, f, opts);
}

// Corrected right-hand side of the lifting transformation: f - (A g)
// restricted to the interior nodes of the inner grid. g lives on an
// enclosing grid and op must be assembled for that enclosing grid.
inline GridFunction lifted_rhs(const FractionalOperator& op,
                               const GridFunction& f,
                               const GridFunction& g_ext) {
  if (!g_ext.grid.same_layout(op.weights().grid)) {
    throw GeometryError("lifted_rhs: exterior data does not match operator");
  }
  const GridFunction ag = op.apply(g_ext);
  const GridFunction ag_inner = restrict_extend(ag, f.grid);
  GridFunction b = f;
  for (std::size_t k = 0; k < b.v.size(); ++k) b.v[k] -= ag_inner.v[k];
  return b;
}

// Nonhomogeneous exterior data by lifting: returns u on the enclosing grid
// with u = g outside the inner domain exactly and A u = f inside it.
inline SolveReport solve_lifted(const UniformGrid& grid, FracOrder s,
                                const GridFunction& f,
                                const GridFunction& g_ext, Normalization norm,
                                double tol = 1e-10) {
  if (!f.grid.same_layout(grid)) {
    throw GeometryError("solve_lifted: f grid mismatch");
  }
  if (!(tol > 0.0) || tol > 1e-4) {
    throw ConfigError("solve_lifted: tol must lie in (0, 1e-4]");
  }
  const auto t0 = std::chrono::steady_clock::now();
  FractionalOperator op(assemble_weights(g_ext.grid, s, norm));
  const GridFunction b = lifted_rhs(op, f, g_ext);

  // The homogeneous unknown lives on the inner grid but couples through the
  // enclosing operator, so the matvec embeds, applies, and restricts.
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    GridFunction win{grid, in};
    const GridFunction wext = restrict_extend(win, g_ext.grid);
    std::vector<double> aext;
    op.apply(wext.v, aext);
    GridFunction af{g_ext.grid, std::move(aext)};
    out = restrict_extend(af, grid).v;
  };
  const int cap = detail::default_cap(b.v.size());
  auto res = detail::pcg(apply, b.v, op.weights().diagonal(), tol, cap);

  GridFunction w_inner{grid, std::move(res.x)};
  GridFunction u = restrict_extend(w_inner, g_ext.grid);
  for (std::size_t k = 0; k < u.v.size(); ++k) u.v[k] += g_ext.v[k];

  SolveReport rep;
  rep.iterations = res.iterations;
  std::vector<double> chk;
  apply(w_inner.v, chk);
  double rr = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < b.v.size(); ++k) {
    const double d = b.v[k] - chk[k];
    rr += d * d;
    bb += b.v[k] * b.v[k];
  }
  rep.residual = bb > 0.0 ? std::sqrt(rr / bb) : 0.0;
  rep.solution = std::move(u);
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

// Smallest Rayleigh quotient <u,Au>/<u,u> by inverse power iteration seeded
// with the positive constant vector (the ground state of an M-matrix is
// positive, so the seed has a nonzero component on it).
inline double poincare_lambda_min(const FractionalOperator& op,
                                  double rel_accuracy = 1e-6) {
  const std::size_t n = op.weights().grid.size();
  auto apply = [&op](const std::vector<double>& in, std::vector<double>& out) {
    op.apply(in, out);
  };
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> ax;
  op.apply(x, ax);
  double lam = detail::dot(x, ax) / detail::dot(x, x);
  std::vector<double> guess;
  const int cap = detail::default_cap(n);
  for (int it = 0; it < 200; ++it) {
    guess = x;
    for (auto& g : guess) g /= lam;
    auto res = detail::pcg(apply, x, op.weights().diagonal(), 1e-9, cap,
                           &guess);
    double nrm = std::sqrt(detail::dot(res.x, res.x));
    for (std::size_t k = 0; k < n; ++k) x[k] = res.x[k] / nrm;
    op.apply(x, ax);
    const double lam_new = detail::dot(x, ax) / detail::dot(x, x);
    const bool converged = std::abs(lam_new - lam) <= rel_accuracy * lam_new;
    lam = lam_new;
    if (converged) return lam;
  }
  throw SolverError("poincare_lambda_min: inverse power iteration stalled",
                    {});
}

inline double poincare_lambda_min(const UniformGrid& grid, FracOrder s,
                                  Normalization norm,
                                  double rel_accuracy = 1e-6) {
  FractionalOperator op(assemble_weights(grid, s, norm));
  return poincare_lambda_min(op, rel_accuracy);
}

}  // namespace fraclap
