// Acceptance suite: one verdict line per criterion, nonzero exit on any
// failure. Thresholds are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fraclap/fraclap.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point crit_start;

void begin() { crit_start = std::chrono::steady_clock::now(); }

void verdict(int number, const std::string& name, bool ok,
             const std::string& detail) {
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    crit_start)
          .count();
  std::printf("[%s] criterion %2d: %s — %s (%.1f s)\n", ok ? "PASS" : "FAIL",
              number, name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// --- criterion 1 -----------------------------------------------------------
void criterion_constants() {
  begin();
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    for (double sv : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      for (auto norm :
           {Normalization::StandardFourPow, Normalization::PaperTwoPow}) {
        worst = std::max(worst,
                         verify_reduction_identity(n, FracOrder(sv), norm));
      }
    }
  }
  verdict(1, "dimensional-reduction constant identity", worst <= 1e-12,
          fmt("max residual %.2e over {2,3,4}x{0.1..0.9}, both norms",
              worst));
}

// --- criterion 2 -----------------------------------------------------------
void criterion_solver_oracle() {
  begin();
  std::vector<double> errs;
  for (double h : {std::pow(2.0, -5), std::pow(2.0, -6), std::pow(2.0, -7)}) {
    const UniformGrid g = UniformGrid::line(-1.0, 1.0, h);
    const GridFunction f =
        GridFunction::sample(g, [](double) { return 1.0; });
    const GridFunction u =
        solve_dirichlet(g, FracOrder(0.5), f, Normalization::StandardFourPow)
            .solution;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n1(); ++i) {
      const double x = g.axis(0).node(i);
      const double exact = std::sqrt(std::max(0.0, 1.0 - x * x));
      const double d = u.v[static_cast<std::size_t>(i)] - exact;
      num += d * d;
      den += exact * exact;
    }
    errs.push_back(std::sqrt(num / den));
  }
  const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
  const bool ok = decreasing && errs[2] <= 0.02;
  verdict(2, "closed-form interval solution oracle", ok,
          fmt("rel L2 errors %.4f%% > %.4f%% > %.4f%% (gate 2%%)",
              100 * errs[0], 100 * errs[1], 100 * errs[2]));
}

// --- criterion 3 -----------------------------------------------------------
void criterion_extrusion() {
  begin();
  const auto rows = extrusion_residual(FracOrder(0.75), 4.0,
                                       {1.0 / 8, 1.0 / 16, 1.0 / 32});
  const bool ok = rows[1].residual < rows[0].residual &&
                  rows[2].residual < rows[1].residual;
  verdict(3, "extrusion consistency under h-halving", ok,
          fmt("interior residuals %.3e > %.3e > %.3e", rows[0].residual,
              rows[1].residual, rows[2].residual));
}

// --- criteria 4 and 6 ------------------------------------------------------
void criteria_cross_section_and_growth() {
  begin();
  LadderSpec spec;
  spec.s = 0.75;
  spec.h = 1.0 / 16.0;
  spec.ladder = {4.0, 8.0, 16.0, 32.0};
  spec.alpha = 0.5;
  const UniformGrid omega = build_grid(CrossSection{1.0}, spec.h);
  const GridFunction f =
      GridFunction::sample(omega, [](double) { return 1.0; });
  const auto res = run_cross_section(spec, f);
  const RateFit fit = fit_rate(res.error_table);
  const bool ok4 = res.error_table.strictly_decreasing() &&
                   fit.exponent <= -0.2 && fit.r2 >= 0.9;
  verdict(4, "cross-section convergence rate", ok4,
          fmt("E decreasing=%d, exponent %.3f (gate -0.2), R^2 %.4f",
              int(res.error_table.strictly_decreasing()), fit.exponent,
              fit.r2));

  begin();
  const double ratio =
      res.growth_table.max_value() / res.growth_table.min_value();
  verdict(6, "linear growth of the solution mass", ratio <= 2.0,
          fmt("G(ell) max/min = %.4f (gate 2)", ratio));

  // supplementary invariant: the same difference restricted to the unit
  // window also decays (the appendix route to the cross-section theorem)
  const bool okA = res.omega1_table.strictly_decreasing();
  std::printf("[%s] supplement  : unit-window difference decreases "
              "(%.3e .. %.3e)\n",
              okA ? "PASS" : "FAIL", res.omega1_table.rows.front().value,
              res.omega1_table.rows.back().value);
  if (!okA) ++failures;
}

// --- criterion 5 -----------------------------------------------------------
void criterion_far_support() {
  begin();
  bool ok = true;
  std::string detail;
  for (double sv : {0.3, 0.5, 0.75}) {
    LadderSpec spec;
    spec.s = sv;
    spec.h = 1.0 / 16.0;
    spec.ladder = {4.0, 8.0, 16.0};
    const auto table = run_far_support(spec);
    const RateFit fit = fit_rate(table);
    const bool this_ok =
        table.strictly_decreasing() && fit.exponent <= -(2.0 * sv - 0.3);
    ok = ok && this_ok;
    detail += fmt("s=%.2f: exp %.2f (gate %.2f); ", sv, fit.exponent,
                  -(2.0 * sv - 0.3));
  }
  verdict(5, "far-support decay over the unit window", ok, detail);
}

// --- criterion 7 -----------------------------------------------------------
void criterion_poincare() {
  begin();
  const double h = 1.0 / 16.0;
  std::vector<double> lams;
  for (double ell : {4.0, 8.0, 16.0}) {
    const UniformGrid g = build_grid(CylinderDomain{ell, CrossSection{1.0}},
                                     h);
    lams.push_back(
        poincare_lambda_min(g, FracOrder(0.5), Normalization::StandardFourPow));
  }
  const bool monotone = lams[1] <= lams[0] * (1.0 + 1e-9) &&
                        lams[2] <= lams[1] * (1.0 + 1e-9);
  const double ratio = lams[2] / lams[1];
  verdict(7, "Poincare constant uniform in the cylinder length",
          monotone && ratio >= 0.9,
          fmt("lambda %.5f >= %.5f >= %.5f, last ratio %.4f (gate 0.9)",
              lams[0], lams[1], lams[2], ratio));
}

// --- criterion 8 -----------------------------------------------------------
void criterion_weighted_functional() {
  begin();
  const FracOrder s(0.75);
  const double eps = s.value();
  std::vector<double> xs;
  for (double x = 0.0; x <= 32.0; x += 0.5) xs.push_back(x);
  for (int j = 1; j <= 8; ++j) {
    for (double c : {8.0, 16.0}) {
      xs.push_back(c * (1.0 + std::pow(2.0, -j)));
      xs.push_back(c * (1.0 - std::pow(2.0, -j)));
    }
  }
  auto scan_max = [&](double lambda) {
    const RhoEpsLambda rho(eps, lambda);
    double best = 0.0;
    for (double x : xs) {
      best = std::max(best, s_s_of_rho(x, eps, lambda, s, 2) *
                                std::pow(lambda, 2.0 * s.value()) / rho(x));
    }
    return best;
  };
  const double m8 = scan_max(8.0);
  const double m16 = scan_max(16.0);
  const bool scaling_ok = std::abs(m8 - m16) <= 0.05 * std::max(m8, m16);

  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-16.0, 16.0);
  double worst_rel = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double x = dist(rng);
    const double direct = oracles::direct_s_s_2d(x, eps, 8.0, s.value());
    const double reduced = s_s_of_rho(x, eps, 8.0, s, 2);
    worst_rel = std::max(worst_rel,
                         std::abs(direct - reduced) / std::abs(reduced));
  }
  verdict(8, "weighted functional: lambda scaling and planar reduction",
          scaling_ok && worst_rel <= 1e-6,
          fmt("scaled maxima %.6f vs %.6f; direct-vs-reduced rel %.2e",
              m8, m16, worst_rel));
}

// --- criterion 9 -----------------------------------------------------------
void criterion_sup_ratio() {
  begin();
  bool ok = true;
  std::string detail;
  for (double eps : {0.5, 1.0, 1.5}) {
    const double measured = sup_ratio(eps);
    const double k = std::pow(2.0, eps) + 1.0;
    ok = ok && measured <= k + 1e-9;
    detail += fmt("eps=%.1f: %.4f <= %.4f; ", eps, measured, k);
  }
  verdict(9, "translation supremum bound of the weight profile", ok, detail);
}

// --- criterion 10 ----------------------------------------------------------
void criterion_appendix_decay() {
  begin();
  const FracOrder s(0.75);
  const double h = 1.0 / 16.0;
  const UniformGrid omega = build_grid(CrossSection{1.0}, h);
  const GridFunction f =
      GridFunction::sample(omega, [](double) { return 1.0; });
  const GridFunction u_inf =
      solve_dirichlet(omega, s, f, Normalization::StandardFourPow).solution;

  ConvergenceTable table;
  for (double ell : {4.0, 8.0, 16.0}) {
    const UniformGrid g2 =
        build_grid(CylinderDomain{2.0 * ell, CrossSection{1.0}}, h);
    const GridFunction big = psi_capital(ell, s, u_inf, g2);
    table.rows.push_back({ell, big.max_abs(),
                          std::numeric_limits<double>::quiet_NaN()});
  }
  const RateFit fit = fit_rate(table);
  const bool ok = table.strictly_decreasing() && fit.exponent <= -2.0;
  verdict(10, "appendix field decay exponent", ok,
          fmt("sup values %.3e > %.3e > %.3e, exponent %.3f (gate -2.0)",
              table.rows[0].value, table.rows[1].value, table.rows[2].value,
              fit.exponent));
}

// --- criterion 11 ----------------------------------------------------------
void criterion_structural() {
  begin();
  int cases = 0;
  bool ok = true;
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  const UniformGrid g1 = UniformGrid::line(-1.0, 1.0, 1.0 / 24.0);
  const UniformGrid g2 = build_grid(CylinderDomain{1.5, CrossSection{1.0}},
                                    1.0 / 6.0);
  for (const UniformGrid& g : {g1, g2}) {
    for (double sv : {0.35, 0.75}) {
      const KernelWeights w =
          assemble_weights(g, FracOrder(sv), Normalization::StandardFourPow);
      const FractionalOperator op(w);

      // M-matrix audit
      ok = ok && w.diagonal() > 0.0;
      for (int d1 = 0; d1 < w.n1 && ok; ++d1) {
        for (int d2 = 0; d2 < w.n2; ++d2) {
          if (d1 == 0 && d2 == 0) continue;
          if (!(w.coupling(d1, d2) <= 0.0)) ok = false;
        }
      }
      ++cases;

      auto random_u = [&]() {
        GridFunction u = GridFunction::zeros(g);
        for (auto& v : u.v) v = dist(rng);
        return u;
      };

      for (int rep = 0; rep < 8; ++rep) {
        const GridFunction u = random_u();
        const GridFunction v = random_u();
        const GridFunction au = op.apply(u);
        const GridFunction av = op.apply(v);
        const double vau = inner_product_h(v, au);
        const double uav = inner_product_h(u, av);
        ok = ok && std::abs(vau - uav) <=
                       1e-12 * std::max(std::abs(vau), std::abs(uav));
        ok = ok && inner_product_h(u, au) > 0.0;
        const double semi = gagliardo_seminorm_sq(u, w);
        ok = ok && std::abs(inner_product_h(u, au) - semi) <= 1e-12 * semi;
        cases += 3;
      }

      for (int rep = 0; rep < 6; ++rep) {
        GridFunction fpos = GridFunction::zeros(g);
        for (auto& x : fpos.v) x = 0.5 * (dist(rng) + 1.0);
        const GridFunction u = solve_dirichlet(op, fpos, {}).solution;
        bool nonneg = true;
        for (double x : u.v) nonneg = nonneg && x >= -1e-12;
        const double uf = inner_product_h(u, fpos);
        const double uau = inner_product_h(u, op.apply(u));
        ok = ok && nonneg &&
             std::abs(uf - uau) <= 1e-9 * std::max(1.0, std::abs(uf));
        cases += 2;
      }

      // evenness preservation on the 2D grid
      if (g.dim() == 2) {
        GridFunction ueven = GridFunction::zeros(g);
        for (int i = 0; i < g.n1(); ++i) {
          for (int j = 0; j < g.n2(); ++j) {
            const double x = g.axis(0).node(i);
            ueven.v[g.index(i, j)] =
                std::cos(1.3 * x) * (1.0 + 0.1 * g.axis(1).node(j));
          }
        }
        const GridFunction au = op.apply(ueven);
        for (int i = 0; i < g.n1(); ++i) {
          for (int j = 0; j < g.n2(); ++j) {
            const double diff = std::abs(
                au.v[g.index(i, j)] - au.v[g.index(g.n1() - 1 - i, j)]);
            if (diff > 1e-9) ok = false;
          }
        }
        ++cases;
      }
    }
  }
  verdict(11, "structural suite on randomized inputs", ok && cases >= 100,
          fmt("%d randomized checks (SPD, symmetry, M-matrix, maximum "
              "principle, energy and seminorm identities, evenness)",
              cases));
}

}  // namespace

int main() {
  std::printf("acceptance suite: desk scale n = 2, omega = (-1,1)\n");
  criterion_constants();
  criterion_solver_oracle();
  criterion_extrusion();
  criteria_cross_section_and_growth();
  criterion_far_support();
  criterion_poincare();
  criterion_weighted_functional();
  criterion_sup_ratio();
  criterion_appendix_decay();
  criterion_structural();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
