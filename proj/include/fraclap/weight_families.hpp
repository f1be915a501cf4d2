#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/constants.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/kernel.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

// Piecewise-linear even cutoff: 1 on (-alpha*ell, alpha*ell), 0 outside
// (-ell, ell), linear in between. The extremal slope 1/((1-alpha) ell) is the
// sharpest profile compatible with |rho'| <= C/ell.
class CutoffRho {
public:
  CutoffRho(double ell, double alpha) : ell_(ell), alpha_(alpha) {
    if (!(ell > 0.0)) throw std::domain_error("CutoffRho: ell must be > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
      throw std::domain_error("CutoffRho: alpha must lie in (0,1)");
    }
  }
  double operator()(double x) const noexcept {
    const double a = std::abs(x);
    if (a <= alpha_ * ell_) return 1.0;
    if (a >= ell_) return 0.0;
    return (ell_ - a) / ((1.0 - alpha_) * ell_);
  }
  double ell() const noexcept { return ell_; }
  double alpha() const noexcept { return alpha_; }
  double slope_bound() const noexcept { return 1.0 / ((1.0 - alpha_) * ell_); }
  std::vector<double> kinks() const {
    return {-ell_, -alpha_ * ell_, alpha_ * ell_, ell_};
  }

private:
  double ell_;
  double alpha_;
};

// phi_eps(t) = min{1/2, 1/(|t|^eps + 1)}, plus the smooth alternative
// 1/(1 + |t|^eps) admissible for eps in (1,2].
enum class PhiVariant { MinForm, SmoothForm };

class PhiEps {
public:
  explicit PhiEps(double eps, PhiVariant variant = PhiVariant::MinForm)
      : eps_(eps), variant_(variant) {
    if (variant == PhiVariant::MinForm) {
      if (!(eps > 0.0) || eps > 2.0) {
        throw std::domain_error("PhiEps: eps must lie in (0,2]");
      }
    } else {
      if (!(eps > 1.0) || eps > 2.0) {
        throw std::domain_error("PhiEps(SmoothForm): eps must lie in (1,2]");
      }
    }
  }
  double eps() const noexcept { return eps_; }
  PhiVariant variant() const noexcept { return variant_; }

  double operator()(double t) const noexcept {
    const double a = std::abs(t);
    if (variant_ == PhiVariant::MinForm && a <= 1.0) return 0.5;
    return 1.0 / (std::pow(a, eps_) + 1.0);
  }

  // (sqrt(phi))'(t), evaluated analytically on the branch of t.
  double sqrt_derivative(double t) const noexcept {
    const double a = std::abs(t);
    if (variant_ == PhiVariant::MinForm && a < 1.0) return 0.0;
    if (a == 0.0) return 0.0;
    const double ae = std::pow(a, eps_);
    const double phi32 = std::pow(1.0 + ae, -1.5);
    const double d = -0.5 * eps_ * std::pow(a, eps_ - 1.0) * phi32;
    return t >= 0.0 ? d : -d;
  }

  // Kink locations of the profile (for quadrature splitting).
  std::vector<double> kinks() const {
    if (variant_ == PhiVariant::MinForm) return {-1.0, 1.0};
    return {0.0};
  }

private:
  double eps_;
  PhiVariant variant_;
};

inline double phi_eps(double t, double eps) { return PhiEps(eps)(t); }

// rho_{eps,lambda}(X) = phi_eps(x1 / lambda); depends on x1 only.
class RhoEpsLambda {
public:
  RhoEpsLambda(double eps, double lambda,
               PhiVariant variant = PhiVariant::MinForm)
      : phi_(eps, variant), lambda_(lambda) {
    if (!(lambda > 0.0)) {
      throw std::domain_error("RhoEpsLambda: lambda must be > 0");
    }
  }
  double operator()(double x1) const noexcept { return phi_(x1 / lambda_); }
  double lambda() const noexcept { return lambda_; }
  const PhiEps& phi() const noexcept { return phi_; }

private:
  PhiEps phi_;
  double lambda_;
};

// C^2 even transition profile: 1 on (-ell,ell)^c, 0 on (-ell+1, ell-1),
// quintic smoothstep across the unit bands. ||psi''||_inf is a fixed number
// of the smoothstep, independent of ell.
class SmoothPsi {
public:
  explicit SmoothPsi(double ell) : ell_(ell) {
    if (!(ell >= 2.0)) throw std::domain_error("SmoothPsi: ell must be >= 2");
  }
  static double smoothstep(double t) noexcept {
    return ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
  }
  static double smoothstep_dd(double t) noexcept {
    return (120.0 * t - 180.0) * t * t + 60.0 * t;
  }
  double operator()(double x) const noexcept {
    const double a = std::abs(x);
    if (a >= ell_) return 1.0;
    if (a <= ell_ - 1.0) return 0.0;
    return smoothstep(a - (ell_ - 1.0));
  }
  double ell() const noexcept { return ell_; }
  // Scanned once; the transition band is the same unit profile for every ell.
  static double second_derivative_sup() {
    static const double sup = [] {
      double m = 0.0;
      for (int i = 0; i <= 20000; ++i) {
        m = std::max(m, std::abs(smoothstep_dd(i / 20000.0)));
      }
      return m;
    }();
    return sup;
  }

private:
  double ell_;
};

// J_ell(y1) = int over R of (rho(x1) - rho(y1))^2 / |x1 - y1|^{1+2s} dx1.
// The cutoff is piecewise linear, so the pieces adjacent to the singularity
// and both far tails are integrated in closed form; the remaining pieces are
// smooth and go through adaptive Gauss-Kronrod.
inline double j_ell(double y1, const CutoffRho& cutoff, FracOrder s,
                    double tol = 1e-9) {
  const double sv = s.value();
  const double rho_y = cutoff(y1);

  std::vector<double> zs = {0.0};
  for (double k : cutoff.kinks()) {
    const double z = k - y1;
    bool dup = false;
    for (double e : zs) {
      if (std::abs(e - z) <= 1e-12 * std::max(1.0, cutoff.ell())) dup = true;
    }
    if (!dup) zs.push_back(z);
  }
  std::sort(zs.begin(), zs.end());

  auto integrand = [&](double z) {
    const double d = cutoff(y1 + z) - rho_y;
    return d * d * std::pow(std::abs(z), -1.0 - 2.0 * sv);
  };

  double total = 0.0;
  const double piece_tol = 0.5 * tol / static_cast<double>(zs.size() + 2);

  // Tails: rho is constant beyond the outermost kinks.
  if (rho_y != 0.0) {
    const double zr = zs.back();
    const double zl = zs.front();
    if (zr > 0.0) {
      total += rho_y * rho_y * std::pow(zr, -2.0 * sv) / (2.0 * sv);
    }
    if (zl < 0.0) {
      total += rho_y * rho_y * std::pow(-zl, -2.0 * sv) / (2.0 * sv);
    }
  }

  for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
    const double a = zs[i], b = zs[i + 1];
    if (b <= a) continue;
    if (a == 0.0 || b == 0.0) {
      // rho is linear between consecutive kinks, so the quotient is exactly
      // m^2 |z|^{1-2s} on this piece.
      const double far = (a == 0.0) ? b : a;
      const double m = (cutoff(y1 + far) - rho_y) / far;
      if (m != 0.0) {
        total += m * m * std::pow(std::abs(far), 2.0 - 2.0 * sv) /
                 (2.0 - 2.0 * sv);
      }
    } else {
      total += quad::gauss_kronrod(integrand, a, b, piece_tol).value;
    }
  }
  return total;
}

// Scan grids for the Lemma-style suprema; log-refined near the profile kinks.
inline std::vector<double> sup_ratio_zgrid() {
  std::vector<double> zs;
  for (int i = -200; i <= 200; ++i) zs.push_back(0.5 * i);
  for (int j = 1; j <= 24; ++j) {
    const double g = std::pow(10.0, -6.0 + 5.5 * (24 - j) / 24.0);
    for (double c : {1.0, 2.0}) {
      zs.push_back(c + g);
      zs.push_back(c - g);
      zs.push_back(-c + g);
      zs.push_back(-c - g);
    }
  }
  return zs;
}

inline std::vector<double> sup_ratio_taugrid() {
  std::vector<double> ts;
  for (int i = 0; i <= 120; ++i) {
    const double t = std::pow(10.0, 2.0 * i / 120.0);  // 1..100
    ts.push_back(t);
    ts.push_back(-t);
  }
  for (int j = 1; j <= 20; ++j) {
    const double g = std::pow(10.0, -6.0 + 5.0 * (20 - j) / 20.0);
    for (double c : {1.0, 2.0}) {
      if (c + g >= 1.0) {
        ts.push_back(c + g);
        ts.push_back(-(c + g));
      }
      if (c - g >= 1.0) {
        ts.push_back(c - g);
        ts.push_back(-(c - g));
      }
    }
  }
  return ts;
}

// max over the scan of phi(z+tau) / (phi(z) |tau|^eps); bounded by 2^eps + 1.
inline double sup_ratio(double eps,
                        const std::vector<double>& zs = sup_ratio_zgrid(),
                        const std::vector<double>& taus = sup_ratio_taugrid()) {
  const PhiEps phi(eps);
  double best = 0.0;
  for (double z : zs) {
    const double denom_base = phi(z);
    for (double t : taus) {
      const double r =
          phi(z + t) / (denom_base * std::pow(std::abs(t), eps));
      best = std::max(best, r);
    }
  }
  return best;
}

namespace detail {

// I_s(x) = int over R minus {0} of (sqrt(phi(x+tau)) - sqrt(phi(x)))^2
//          |tau|^{-1-2s} dtau, split at |tau| = 1 into near and far parts.
inline double i_s_near(double x, const PhiEps& phi, double sv, double tol) {
  const double switch_at = 1e-5 * (1.0 + std::abs(x));
  const double gx = std::sqrt(phi(x));
  auto f = [&](double tau) {
    const double a = std::abs(tau);
    if (a < 1e-60) return 0.0;
    if (a < switch_at) {
      // Midpoint-derivative model removes the cancellation of the direct
      // difference at tiny offsets.
      const double sd = phi.sqrt_derivative(x + 0.5 * tau);
      return sd * sd * std::pow(a, 1.0 - 2.0 * sv);
    }
    const double d = std::sqrt(phi(x + tau)) - gx;
    return d * d * std::pow(a, -1.0 - 2.0 * sv);
  };

  std::vector<double> brk = {-1.0, 0.0, 1.0};
  for (double k : phi.kinks()) {
    const double t = k - x;
    if (t > -1.0 + 1e-14 && t < 1.0 - 1e-14 && std::abs(t) > 1e-14) {
      brk.push_back(t);
    }
  }
  std::sort(brk.begin(), brk.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    const double a = brk[i], b = brk[i + 1];
    if (b <= a) continue;
    if (a == 0.0 || b == 0.0) {
      total += quad::tanh_sinh(f, a, b, 1e-11);
    } else {
      total += quad::gauss_kronrod(f, a, b, 0.25 * tol / brk.size()).value;
    }
  }
  return total;
}

// One far side: int_1^inf (sqrt(phi(x + sign*sigma)) - sqrt(phi(x)))^2
// sigma^{-1-2s} dsigma, numeric on geometrically growing panels plus the
// analytic principal tail phi(x) T^{-2s} / (2s); the neglected cross terms
// are bounded through phi(w) <= |w|^{-eps} and |x + sign*sigma| >= sigma/2.
inline double i_s_far_side(double x, int sign, const PhiEps& phi, double sv,
                           double tol) {
  const double eps = phi.eps();
  const double phix = phi(x);
  const double gx = std::sqrt(phix);
  auto f = [&](double sigma) {
    const double d = std::sqrt(phi(x + sign * sigma)) - gx;
    return d * d * std::pow(sigma, -1.0 - 2.0 * sv);
  };

  std::vector<double> brk = {1.0};
  for (double k : phi.kinks()) {
    const double t = (k - x) * sign;
    if (t > 1.0 + 1e-14) brk.push_back(t);
  }
  const double start_geo = std::max({2.0, 2.0 * std::abs(x) + 2.0,
                                     brk.empty() ? 0.0 : brk.back()});
  brk.push_back(start_geo);
  std::sort(brk.begin(), brk.end());

  double total = 0.0;
  const double piece_tol = 0.1 * tol;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    if (brk[i + 1] > brk[i]) {
      total += quad::gauss_kronrod(f, brk[i], brk[i + 1], piece_tol).value;
    }
  }

  auto errbound = [&](double t) {
    const double b3 = std::pow(2.0, eps) * std::pow(t, eps - 2.0 * sv) /
                      (2.0 * sv - eps);
    const double b2 = 2.0 * gx * std::pow(2.0, 0.5 * eps) *
                      std::pow(t, 0.5 * eps - 2.0 * sv) /
                      (2.0 * sv - 0.5 * eps);
    return b2 + b3;
  };

  double t = start_geo;
  int guard = 0;
  while (errbound(t) > 0.5 * tol && guard++ < 64) {
    total += quad::gauss_kronrod(f, t, 2.0 * t, piece_tol).value;
    t *= 2.0;
  }
  if (errbound(t) > 0.5 * tol) {
    throw QuadratureError("i_s_integral: far tail tolerance not met",
                          errbound(t), 0.5 * tol);
  }
  total += phix * std::pow(t, -2.0 * sv) / (2.0 * sv);
  return total;
}

}  // namespace detail

// Reduced 1D integral of the S_s functional for the x1-dependent weight.
inline double i_s_integral(double x, const PhiEps& phi, FracOrder s,
                           double tol = 1e-9) {
  if (!(phi.eps() < 2.0 * s.value())) {
    throw std::domain_error(
        "i_s_integral: requires eps < 2s, the far integral diverges "
        "otherwise");
  }
  const double sv = s.value();
  return detail::i_s_near(x, phi, sv, 0.4 * tol) +
         detail::i_s_far_side(x, +1, phi, sv, 0.3 * tol) +
         detail::i_s_far_side(x, -1, phi, sv, 0.3 * tol);
}

// S_s(rho_{eps,lambda})(X) = Theta * lambda^{-2s} * I_s(x1/lambda), with
// Theta the product of the reduction constants for dimensions 2..n.
inline double s_s_of_rho(double x1, double eps, double lambda, FracOrder s,
                         int n, double tol = 1e-9,
                         PhiVariant variant = PhiVariant::MinForm) {
  if (!(lambda > 0.0)) throw std::domain_error("s_s_of_rho: lambda > 0");
  const PhiEps phi(eps, variant);
  const double theta = theta_product(n, s);
  return theta * std::pow(lambda, -2.0 * s.value()) *
         i_s_integral(x1 / lambda, phi, s, tol);
}

// max over the sample grid of |(sqrt(phi))'(x+xi)|^2 / phi(x), the constant
// of the derivative lemma; the kink |x+xi| = 1 is excluded.
inline double sqrt_phi_derivative_bound(double eps, int nx = 1001,
                                        int nxi = 81) {
  const PhiEps phi(eps);
  double best = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = -50.0 + 100.0 * i / (nx - 1);
    const double px = phi(x);
    for (int j = 0; j < nxi; ++j) {
      const double xi = -1.0 + 2.0 * j / (nxi - 1);
      if (std::abs(std::abs(x + xi) - 1.0) < 1e-9) continue;
      const double d = phi.sqrt_derivative(x + xi);
      best = std::max(best, d * d / px);
    }
  }
  return best;
}

// Discrete realization of the Appendix field: extrude u_inf, multiply by
// psi_ell(x1), apply the 2D operator, restrict to the Omega_{ell/2} nodes.
inline GridFunction psi_capital(double ell, FracOrder s,
                                const GridFunction& u_inf,
                                const UniformGrid& grid2d,
                                Normalization norm =
                                    Normalization::StandardFourPow) {
  if (!(ell >= 4.0)) throw std::domain_error("psi_capital: ell must be >= 4");
  if (grid2d.dim() != 2) throw GeometryError("psi_capital: need a 2D grid");
  if (grid2d.axis(0).lo > -ell || grid2d.axis(0).hi < ell) {
    throw GeometryError("psi_capital: grid does not cover (-ell, ell)");
  }
  const SmoothPsi psi(ell);
  GridFunction field = extrude(u_inf, grid2d);
  for (int i = 0; i < grid2d.n1(); ++i) {
    const double p = psi(grid2d.axis(0).node(i));
    for (int j = 0; j < grid2d.n2(); ++j) {
      field.v[grid2d.index(i, j)] *= p;
    }
  }
  FractionalOperator op(assemble_weights(grid2d, s, norm));
  const GridFunction af = op.apply(field);

  const double hw = u_inf.grid.axis(0).hi;
  const UniformGrid half = build_grid(
      CylinderDomain{0.5 * ell, CrossSection{hw}}, grid2d.h());
  return restrict_extend(af, half);
}

// Reports the measured sup of S_s(rho_{eps,lambda}) lambda^{2s} / rho and the
// smallest lambda putting C_eps / lambda^{2s} below gamma * C0.
struct GammaThreshold {
  double c_eps = 0.0;
  double lambda_min = 0.0;
};

inline std::vector<double> default_t_scan() {
  std::vector<double> ts;
  for (int i = -160; i <= 160; ++i) ts.push_back(0.1 * i);  // [-16, 16]
  for (int j = 1; j <= 14; ++j) {
    const double g = std::pow(2.0, -j);
    for (double c : {1.0, -1.0}) {
      ts.push_back(c + g);
      ts.push_back(c - g);
    }
  }
  return ts;
}

inline double scaled_s_s_max(double eps, FracOrder s, int n,
                             const std::vector<double>& t_scan =
                                 default_t_scan(),
                             PhiVariant variant = PhiVariant::MinForm) {
  const PhiEps phi(eps, variant);
  const double theta = theta_product(n, s);
  double best = 0.0;
  for (double t : t_scan) {
    best = std::max(best, theta * i_s_integral(t, phi, s) / phi(t));
  }
  return best;
}

inline GammaThreshold gamma_threshold(double eps, FracOrder s, int n,
                                      double c0_proxy = 1.0,
                                      double gamma = 0.1) {
  GammaThreshold g;
  g.c_eps = scaled_s_s_max(eps, s, n);
  g.lambda_min = std::pow(g.c_eps / (c0_proxy * gamma),
                          1.0 / (2.0 * s.value()));
  return g;
}

}  // namespace fraclap
