#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fraclap/solver.hpp"

using namespace fraclap;
using Catch::Approx;

namespace {

GridFunction random_nonneg(const UniformGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  GridFunction u = GridFunction::zeros(g);
  for (auto& v : u.v) v = dist(rng);
  return u;
}

double rel_l2_error(const GridFunction& u, const GridFunction& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.v.size(); ++k) {
    const double d = u.v[k] - ref.v[k];
    num += d * d;
    den += ref.v[k] * ref.v[k];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("zero force yields the zero solution in zero iterations") {
  const UniformGrid g = UniformGrid::line(-1.0, 1.0, 1.0 / 16.0);
  const SolveReport rep = solve_dirichlet(
      g, FracOrder(0.5), GridFunction::zeros(g),
      Normalization::StandardFourPow);
  CHECK(rep.iterations == 0);
  CHECK(rep.solution.max_abs() == 0.0);
}

TEST_CASE("solver oracle: the square-root profile of the unit interval") {
  const UniformGrid g = UniformGrid::line(-1.0, 1.0, std::pow(2.0, -7));
  const GridFunction f =
      GridFunction::sample(g, [](double) { return 1.0; });
  const SolveReport rep =
      solve_dirichlet(g, FracOrder(0.5), f, Normalization::StandardFourPow);
  const GridFunction exact = GridFunction::sample(
      g, [](double x) { return std::sqrt(std::max(0.0, 1.0 - x * x)); });
  CHECK(rel_l2_error(rep.solution, exact) <= 0.02);
  CHECK(rep.residual <= 1e-10);
}

TEST_CASE("maximum principle: nonnegative force gives nonnegative solution") {
  const UniformGrid g = build_grid(CylinderDomain{1.0, CrossSection{1.0}},
                                   1.0 / 6.0);
  const FractionalOperator op(
      assemble_weights(g, FracOrder(0.65), Normalization::StandardFourPow));
  for (unsigned seed = 0; seed < 30; ++seed) {
    const GridFunction f = random_nonneg(g, seed);
    const SolveReport rep = solve_dirichlet(op, f, {});
    for (double v : rep.solution.v) REQUIRE(v >= -1e-12);
  }
}

TEST_CASE("residual certificate: reported residual is independently verified") {
  const UniformGrid g = build_grid(CylinderDomain{2.0, CrossSection{1.0}},
                                   1.0 / 8.0);
  const FractionalOperator op(
      assemble_weights(g, FracOrder(0.75), Normalization::StandardFourPow));
  const GridFunction f = GridFunction::sample(
      g, [](double x, double y) { return std::cos(x) + 0.1 * y; });
  const SolveReport rep = solve_dirichlet(op, f, {});

  std::vector<double> au;
  op.apply(rep.solution.v, au);
  double rr = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    const double d = f.v[k] - au[k];
    rr += d * d;
    bb += f.v[k] * f.v[k];
  }
  const double recomputed = std::sqrt(rr / bb);
  CHECK(std::abs(recomputed - rep.residual) <= 1e-10);
  CHECK(rep.residual <= 1e-10);
}

TEST_CASE("energy identity after solve") {
  const UniformGrid g = build_grid(CylinderDomain{1.0, CrossSection{1.0}},
                                   1.0 / 8.0);
  const FractionalOperator op(
      assemble_weights(g, FracOrder(0.5), Normalization::StandardFourPow));
  const GridFunction f = GridFunction::sample(
      g, [](double x, double y) { return 1.0 + 0.5 * x * y; });
  SolverOptions opts;
  opts.tol = 1e-10;
  const SolveReport rep = solve_dirichlet(op, f, opts);
  const double uf = inner_product_h(rep.solution, f);
  const double uau = inner_product_h(rep.solution, op.apply(rep.solution));
  CHECK(std::abs(uf - uau) <= 10.0 * opts.tol * std::abs(uf) + 1e-14);
}

TEST_CASE("linearity within solver tolerance") {
  const UniformGrid g = UniformGrid::line(-1.0, 1.0, 1.0 / 32.0);
  const FractionalOperator op(
      assemble_weights(g, FracOrder(0.4), Normalization::StandardFourPow));
  const GridFunction f1 = GridFunction::sample(
      g, [](double x) { return std::exp(-x * x); });
  const GridFunction f2 = GridFunction::sample(
      g, [](double x) { return x > 0.0 ? 1.0 : 0.25; });
  GridFunction f12 = f1;
  for (std::size_t k = 0; k < f12.v.size(); ++k) f12.v[k] += f2.v[k];

  SolverOptions opts;
  opts.tol = 1e-10;
  const GridFunction u1 = solve_dirichlet(op, f1, opts).solution;
  const GridFunction u2 = solve_dirichlet(op, f2, opts).solution;
  const GridFunction u12 = solve_dirichlet(op, f12, opts).solution;
  double scale = u12.max_abs();
  for (std::size_t k = 0; k < u12.v.size(); ++k) {
    REQUIRE(std::abs(u12.v[k] - u1.v[k] - u2.v[k]) <= 10.0 * opts.tol * scale);
  }
}

TEST_CASE("tolerance precondition") {
  const UniformGrid g = UniformGrid::line(-1.0, 1.0, 0.25);
  const GridFunction f = GridFunction::sample(g, [](double) { return 1.0; });
  CHECK_THROWS_AS(solve_dirichlet(g, FracOrder(0.5), f,
                                  Normalization::StandardFourPow, 1e-3),
                  ConfigError);
  CHECK_THROWS_AS(solve_dirichlet(g, FracOrder(0.5), f,
                                  Normalization::StandardFourPow, 0.0),
                  ConfigError);
}

TEST_CASE("iteration cap failure reports the residual history") {
  const UniformGrid g = UniformGrid::line(-1.0, 1.0, 1.0 / 64.0);
  const FractionalOperator op(
      assemble_weights(g, FracOrder(0.9), Normalization::StandardFourPow));
  const GridFunction f = GridFunction::sample(g, [](double) { return 1.0; });
  SolverOptions opts;
  opts.tol = 1e-10;
  opts.max_iterations = 2;
  try {
    solve_dirichlet(op, f, opts);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual_history().size() == 2);
    CHECK(e.residual_history().back() > 0.0);
  }
}

TEST_CASE("lifted solve with zero exterior data reduces to the plain solve") {
  const UniformGrid g = build_grid(CylinderDomain{1.0, CrossSection{1.0}},
                                   1.0 / 6.0);
  const GridFunction f = GridFunction::sample(
      g, [](double x, double y) { return 1.0 + x * x + y; });
  const SolveReport plain =
      solve_dirichlet(g, FracOrder(0.5), f, Normalization::StandardFourPow);
  const SolveReport lifted = solve_lifted(
      g, FracOrder(0.5), f, GridFunction::zeros(g),
      Normalization::StandardFourPow);
  REQUIRE(lifted.solution.grid.same_layout(g));
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    REQUIRE(std::abs(lifted.solution.v[k] - plain.solution.v[k]) <= 1e-12);
  }
}

TEST_CASE("lifted solve reproduces the exterior data outside the domain") {
  const double h = 1.0 / 8.0;
  const FracOrder s(0.75);
  const UniformGrid omega = build_grid(CrossSection{1.0}, h);
  const GridFunction f1d =
      GridFunction::sample(omega, [](double) { return 1.0; });
  const GridFunction u_inf =
      solve_dirichlet(omega, s, f1d, Normalization::StandardFourPow).solution;

  const UniformGrid inner = build_grid(CylinderDomain{2.0, CrossSection{1.0}},
                                       h);
  const UniformGrid enc = build_grid(CylinderDomain{6.0, CrossSection{1.0}},
                                     h);
  GridFunction g_ext = extrude(u_inf, enc);
  for (auto& v : g_ext.v) v = -v;  // the difference field's exterior data

  const SolveReport rep = solve_lifted(inner, s, GridFunction::zeros(inner),
                                       g_ext, Normalization::StandardFourPow);
  // outside the inner cylinder the solution equals g exactly
  for (int i = 0; i < enc.n1(); ++i) {
    const double x1 = enc.axis(0).node(i);
    if (std::abs(x1) <= 2.0) continue;
    for (int j = 0; j < enc.n2(); ++j) {
      REQUIRE(rep.solution.v[enc.index(i, j)] == g_ext.v[enc.index(i, j)]);
    }
  }
  // and the energy of the homogeneous part is nonnegative (SPD form)
  GridFunction v_home = rep.solution;
  for (std::size_t k = 0; k < v_home.v.size(); ++k) {
    v_home.v[k] -= g_ext.v[k];
  }
  const FractionalOperator op_enc(
      assemble_weights(enc, s, Normalization::StandardFourPow));
  CHECK(inner_product_h(v_home, op_enc.apply(v_home)) >= 0.0);
}

TEST_CASE("smallest Rayleigh quotient: positivity and domain monotonicity") {
  const double h = 1.0 / 8.0;
  const FracOrder s(0.5);
  const UniformGrid g2 = build_grid(CylinderDomain{2.0, CrossSection{1.0}}, h);
  const UniformGrid g4 = build_grid(CylinderDomain{4.0, CrossSection{1.0}}, h);
  const double lam2 =
      poincare_lambda_min(g2, s, Normalization::StandardFourPow);
  const double lam4 =
      poincare_lambda_min(g4, s, Normalization::StandardFourPow);
  CHECK(lam2 > 0.0);
  CHECK(lam4 > 0.0);
  CHECK(lam4 <= lam2);
}

TEST_CASE("Poincare consequence for solved fields") {
  const UniformGrid g = build_grid(CylinderDomain{2.0, CrossSection{1.0}},
                                   1.0 / 8.0);
  const FracOrder s(0.5);
  const FractionalOperator op(
      assemble_weights(g, s, Normalization::StandardFourPow));
  // Rayleigh quotients approach lambda_min from above; a tight eigenvalue
  // keeps the slack of the inequality below the stated budget.
  const double lam = poincare_lambda_min(op, 1e-9);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const GridFunction f = random_nonneg(g, 900 + seed);
    const GridFunction u = solve_dirichlet(op, f, {}).solution;
    const double uu = inner_product_h(u, u);
    const double uau = inner_product_h(u, op.apply(u));
    REQUIRE(uu <= uau / lam + 1e-8);
  }
}
