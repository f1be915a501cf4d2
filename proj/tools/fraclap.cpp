// Command-line front end: constants, solve, weights, rates, poincare,
// extrusion. Exit codes: 0 ok, 2 config, 3 geometry, 4 I/O, 5 solver.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclap/fraclap.hpp"

namespace {

using namespace fraclap;
using nlohmann::json;

json run_constants(int n, double s_raw, const std::string& norm_text) {
  const FracOrder s(s_raw);
  const Normalization norm = io::parse_norm(norm_text);
  json out;
  out["c_ns"] = c_ns(n, s, norm);
  out["theta_n"] = theta_n(n, s).value;
  if (n >= 2) {
    out["residual"] = verify_reduction_identity(n, s, norm);
  } else {
    out["residual"] = nullptr;
  }
  return out;
}

GridFunction resolve_force_1d(const io::ForceSpec& force,
                              const UniformGrid& grid, double ell) {
  switch (force.kind) {
    case io::ForceKind::One:
      return GridFunction::sample(grid, [](double) { return 1.0; });
    case io::ForceKind::Slab: {
      if (!(ell > 1.0)) {
        throw GeometryError("slab force needs ell > 1");
      }
      const double edge = ell - 1.0 - 1e-9 * grid.h();
      return GridFunction::sample(
          grid, [edge](double x) { return std::abs(x) >= edge ? 1.0 : 0.0; });
    }
    case io::ForceKind::Profile: {
      GridFunction p = io::read_profile_csv(force.profile_path);
      if (!p.grid.same_layout(grid)) {
        throw GeometryError(
            "force profile grid does not match the requested grid");
      }
      return p;
    }
  }
  throw ConfigError("unreachable force kind");
}

int run_solve(int dim, double s_raw, double ell, double h,
              const std::string& force_text, const std::string& norm_text,
              double tol, const std::string& out_path) {
  const FracOrder s(s_raw);
  const Normalization norm = io::parse_norm(norm_text);
  const io::ForceSpec force = io::ForceSpec::parse(force_text);

  GridFunction f{UniformGrid::line(-1, 1, 0.5), {}};
  UniformGrid grid = UniformGrid::line(-1, 1, 0.5);
  if (dim == 1) {
    grid = UniformGrid::line(-ell, ell, h);
    f = resolve_force_1d(force, grid, ell);
  } else if (dim == 2) {
    grid = build_grid(CylinderDomain{ell, CrossSection{1.0}}, h);
    switch (force.kind) {
      case io::ForceKind::One:
        f = GridFunction::sample(grid, [](double, double) { return 1.0; });
        break;
      case io::ForceKind::Slab: {
        if (!(ell > 1.0)) throw GeometryError("slab force needs ell > 1");
        const double edge = ell - 1.0 - 1e-9 * h;
        f = GridFunction::sample(grid, [edge](double x1, double) {
          return std::abs(x1) >= edge ? 1.0 : 0.0;
        });
        break;
      }
      case io::ForceKind::Profile: {
        GridFunction p = io::read_profile_csv(force.profile_path);
        f = extrude(p, grid);
        break;
      }
    }
  } else {
    throw ConfigError("--dim must be 1 or 2");
  }

  const SolveReport rep = solve_dirichlet(grid, s, f, norm, tol);
  const SubdomainMask full =
      dim == 1 ? SubdomainMask::interval(-ell, ell)
               : SubdomainMask::cylinder(ell, 1.0);
  json out;
  out["iterations"] = rep.iterations;
  out["residual"] = rep.residual;
  out["l2_sq"] = l2_norm_sq_on(rep.solution, full);
  std::cout << out.dump(2) << "\n";
  if (!out_path.empty()) {
    io::atomic_write(out_path, io::grid_function_csv(rep.solution));
  }
  return 0;
}

int run_weights_scan(const std::string& family, double s_raw, double eps,
                     double lambda, double ell, double alpha, int samples,
                     const std::string& out_path) {
  std::ostringstream csv;
  csv << "input,value,bound,ratio\n";
  json summary;
  summary["family"] = family;

  if (family == "rho") {
    const CutoffRho rho(ell, alpha);
    for (int i = 0; i < samples; ++i) {
      const double x = -1.5 * ell + 3.0 * ell * i / (samples - 1);
      const double v = rho(x);
      csv << io::format_g17(x) << ',' << io::format_g17(v) << ",1,"
          << io::format_g17(v) << '\n';
    }
  } else if (family == "phi") {
    const PhiEps phi(eps);
    for (int i = 0; i < samples; ++i) {
      const double t = -20.0 + 40.0 * i / (samples - 1);
      const double v = phi(t);
      csv << io::format_g17(t) << ',' << io::format_g17(v) << ",0.5,"
          << io::format_g17(v / 0.5) << '\n';
    }
  } else if (family == "slambda") {
    const FracOrder s(s_raw);
    const RhoEpsLambda rho(eps, lambda);
    const GammaThreshold gt = gamma_threshold(eps, s, 2);
    for (int i = 0; i < samples; ++i) {
      const double x = -4.0 * lambda + 8.0 * lambda * i / (samples - 1);
      const double v = s_s_of_rho(x, eps, lambda, s, 2);
      const double bound =
          gt.c_eps * std::pow(lambda, -2.0 * s.value()) * rho(x);
      csv << io::format_g17(x) << ',' << io::format_g17(v) << ','
          << io::format_g17(bound) << ',' << io::format_g17(v / bound) << '\n';
    }
    summary["c_eps"] = gt.c_eps;
    summary["lambda_min"] = gt.lambda_min;
  } else if (family == "psi") {
    const SmoothPsi psi(ell);
    for (int i = 0; i < samples; ++i) {
      const double x = -1.5 * ell + 3.0 * ell * i / (samples - 1);
      const double v = psi(x);
      csv << io::format_g17(x) << ',' << io::format_g17(v) << ",1,"
          << io::format_g17(v) << '\n';
    }
    summary["second_derivative_sup"] = SmoothPsi::second_derivative_sup();
  } else {
    throw ConfigError("--family must be rho | phi | slambda | psi");
  }

  if (!out_path.empty()) {
    io::atomic_write(out_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  std::cerr << summary.dump(2) << "\n";
  return 0;
}

GridFunction rates_force_profile(const io::RunConfig& cfg,
                                 const UniformGrid& omega) {
  switch (cfg.force.kind) {
    case io::ForceKind::One:
      return GridFunction::sample(omega, [](double) { return 1.0; });
    case io::ForceKind::Profile: {
      GridFunction p = io::read_profile_csv(cfg.force.profile_path);
      if (!p.grid.same_layout(omega)) {
        throw GeometryError("force profile does not match the omega grid");
      }
      return p;
    }
    default:
      throw ConfigError(
          "cross-section experiments need a cross-section force (one or "
          "profile:<path>)");
  }
}

int run_rates(const std::string& kind, const std::string& config_path,
              const std::string& out_dir) {
  const io::RunConfig cfg = io::parse_config(config_path);
  const LadderSpec spec = cfg.ladder_spec();
  spec.validate();

  io::RatesOutput out;
  json& summary = out.summary;

  if (kind == "cross-section") {
    const UniformGrid omega = build_grid(CrossSection{1.0}, cfg.h);
    const auto res = run_cross_section(spec, rates_force_profile(cfg, omega));
    out.table = res.error_table;
    const RateFit fit = fit_rate(res.error_table);
    const bool asserting = cfg.s > 0.5;
    summary["exponent"] = fit.exponent;
    summary["r2"] = fit.r2;
    summary["asserted"] = asserting;
    summary["pass"] =
        !asserting || (res.error_table.strictly_decreasing() &&
                       fit.exponent <= -(2.0 * cfg.s - 1.0) + 0.3 &&
                       fit.r2 >= 0.9);
  } else if (kind == "far-support") {
    out.table = run_far_support(spec);
    const RateFit fit = fit_rate(out.table);
    summary["exponent"] = fit.exponent;
    summary["r2"] = fit.r2;
    summary["pass"] = out.table.strictly_decreasing() &&
                      fit.exponent <= -(2.0 * cfg.s - 0.3);
  } else if (kind == "linear-growth") {
    const UniformGrid omega = build_grid(CrossSection{1.0}, cfg.h);
    out.table = run_linear_growth(spec, rates_force_profile(cfg, omega));
    const RateFit fit = fit_rate(out.table);
    summary["exponent"] = fit.exponent;
    summary["r2"] = fit.r2;
    summary["pass"] = out.table.max_value() <= 2.0 * out.table.min_value();
  } else if (kind == "weighted") {
    out.table = weighted_estimate_check(spec);
    const RateFit fit = fit_rate(out.table);
    summary["exponent"] = fit.exponent;
    summary["r2"] = fit.r2;
    summary["pass"] = out.table.max_value() <= 2.0 * out.table.min_value();
  } else {
    throw ConfigError(
        "rates kind must be cross-section | far-support | linear-growth | "
        "weighted");
  }

  io::emit_outputs(out_dir, out);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_poincare(double s_raw, double h, std::vector<double> ladder,
                 const std::string& norm_text) {
  const FracOrder s(s_raw);
  const Normalization norm = io::parse_norm(norm_text);
  json rows = json::array();
  bool nonincreasing = true;
  double prev = 0.0, last_ratio = 1.0;
  for (double ell : ladder) {
    const UniformGrid grid = build_grid(CylinderDomain{ell, CrossSection{1.0}}, h);
    const double lam = poincare_lambda_min(grid, s, norm);
    rows.push_back({{"ell", ell}, {"lambda_min", lam}});
    if (prev > 0.0) {
      if (lam > prev * (1.0 + 1e-9)) nonincreasing = false;
      last_ratio = lam / prev;
    }
    prev = lam;
  }
  json out;
  out["lambda_min"] = rows;
  out["nonincreasing"] = nonincreasing;
  out["last_ratio"] = last_ratio;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_extrusion(double s_raw, double ell, std::vector<double> h_ladder,
                  const std::string& out_dir) {
  const FracOrder s(s_raw);
  const auto rows = extrusion_residual(s, ell, h_ladder);
  std::ostringstream csv;
  csv << "h,residual\n";
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << io::format_g17(rows[i].h) << ','
        << io::format_g17(rows[i].residual) << '\n';
    if (i > 0 && !(rows[i].residual < rows[i - 1].residual)) {
      decreasing = false;
    }
  }
  std::filesystem::create_directories(out_dir);
  io::atomic_write(std::filesystem::path(out_dir) / "table.csv", csv.str());
  json summary;
  summary["pass"] = decreasing;
  io::atomic_write(std::filesystem::path(out_dir) / "summary.json",
                   summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional Laplacian cylinder toolkit"};
  app.require_subcommand(1);
  // --h is a spacing flag below, so help lives on --help only
  app.set_help_flag("--help", "print usage");
  auto subcommand = [&app](const std::string& name, const std::string& desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->set_help_flag("--help", "print usage");
    return sub;
  };

  // constants
  auto* c_cmd = subcommand("constants", "normalization constants");
  int c_n = 2;
  double c_s = 0.75;
  std::string c_norm = "standard";
  c_cmd->add_option("--n", c_n, "dimension")->required();
  c_cmd->add_option("--s", c_s, "fractional order")->required();
  c_cmd->add_option("--norm", c_norm, "paper|standard");

  // solve
  auto* s_cmd = subcommand("solve", "Dirichlet solve");
  int s_dim = 1;
  double s_s = 0.75, s_ell = 1.0, s_h = 1.0 / 16.0, s_tol = 1e-10;
  std::string s_f = "one", s_norm = "standard", s_out;
  s_cmd->add_option("--dim", s_dim, "1 or 2")->required();
  s_cmd->add_option("--s", s_s)->required();
  s_cmd->add_option("--ell", s_ell)->required();
  s_cmd->add_option("--h", s_h)->required();
  s_cmd->add_option("--f", s_f, "one | slab | profile:<path>");
  s_cmd->add_option("--norm", s_norm);
  s_cmd->add_option("--tol", s_tol);
  s_cmd->add_option("--out", s_out, "solution CSV path");

  // weights scan
  auto* w_cmd = subcommand("weights", "weight families");
  auto* w_scan = w_cmd->add_subcommand("scan", "sample a family");
  w_scan->set_help_flag("--help", "print usage");
  std::string w_family, w_out;
  double w_s = 0.75, w_eps = 0.75, w_lambda = 8.0, w_ell = 4.0, w_alpha = 0.5;
  int w_samples = 201;
  w_scan->add_option("--family", w_family)->required();
  w_scan->add_option("--s", w_s);
  w_scan->add_option("--eps", w_eps);
  w_scan->add_option("--lambda", w_lambda);
  w_scan->add_option("--ell", w_ell);
  w_scan->add_option("--alpha", w_alpha);
  w_scan->add_option("--samples", w_samples);
  w_scan->add_option("--out", w_out);

  // rates
  auto* r_cmd = subcommand("rates", "ladder experiments");
  std::string r_kind, r_config, r_out = ".";
  r_cmd->add_option("kind", r_kind,
                    "cross-section|far-support|linear-growth|weighted")
      ->required();
  r_cmd->add_option("--config", r_config)->required();
  r_cmd->add_option("--out", r_out, "output directory");

  // poincare
  auto* p_cmd = subcommand("poincare", "smallest Rayleigh quotient");
  double p_s = 0.5, p_h = 1.0 / 16.0;
  std::vector<double> p_ladder = {4, 8, 16};
  std::string p_norm = "standard";
  p_cmd->add_option("--s", p_s)->required();
  p_cmd->add_option("--h", p_h);
  p_cmd->add_option("--ladder", p_ladder)->delimiter(',');
  p_cmd->add_option("--norm", p_norm);

  // extrusion
  auto* e_cmd = subcommand("extrusion", "extrusion residual study");
  double e_s = 0.75, e_ell = 4.0;
  std::vector<double> e_h = {0.125, 0.0625, 0.03125};
  std::string e_out = ".";
  e_cmd->add_option("--s", e_s)->required();
  e_cmd->add_option("--ell", e_ell)->required();
  e_cmd->add_option("--h-ladder", e_h)->delimiter(',');
  e_cmd->add_option("--out", e_out);

  try {
    app.parse(argc, argv);
    fraclap::thread_cap_checked();  // validate FRAC_THREADS up front

    if (c_cmd->parsed()) {
      std::cout << run_constants(c_n, c_s, c_norm).dump(2) << "\n";
      return 0;
    }
    if (s_cmd->parsed()) {
      return run_solve(s_dim, s_s, s_ell, s_h, s_f, s_norm, s_tol, s_out);
    }
    if (w_cmd->parsed()) {
      if (!w_scan->parsed()) {
        throw fraclap::ConfigError("weights requires the 'scan' subcommand");
      }
      return run_weights_scan(w_family, w_s, w_eps, w_lambda, w_ell, w_alpha,
                              w_samples, w_out);
    }
    if (r_cmd->parsed()) return run_rates(r_kind, r_config, r_out);
    if (p_cmd->parsed()) return run_poincare(p_s, p_h, p_ladder, p_norm);
    if (e_cmd->parsed()) return run_extrusion(e_s, e_ell, e_h, e_out);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const fraclap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
