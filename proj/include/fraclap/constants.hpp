#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fraclap/quadrature.hpp"

namespace fraclap {

// Fractional order s in the open interval (0,1); endpoints rejected.
class FracOrder {
public:
  explicit FracOrder(double s) : s_(s) {
    if (!(s > 0.0) || !(s < 1.0)) {
      throw std::domain_error("fractional order s must lie in (0,1), got " +
                              std::to_string(s));
    }
  }
  double value() const noexcept { return s_; }

private:
  double s_;
};

// Two conventions for the normalization constant of the integral operator:
//   PaperTwoPow:      s * 2^s * Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s))
//   StandardFourPow:  same with 4^s, the Fourier-symbol normalization.
// The 2^s/4^s factor is n-independent, so the dimensional-reduction identity
// holds for both.
enum class Normalization { PaperTwoPow, StandardFourPow };

// Lanczos rational approximation, g = 607/128, 15 coefficients.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("gamma_fn: argument must be positive, got " +
                            std::to_string(x));
  }
  static constexpr double g = 607.0 / 128.0;
  static constexpr std::array<double, 15> c = {
      0.99999999999999709182,     57.156235665862923517,
      -59.597960355475491248,     14.136097974741747174,
      -0.49191381609762019978,    0.33994649984811888699e-4,
      0.46523628927048575665e-4,  -0.98374475304879564677e-4,
      0.15808870322491248884e-3,  -0.21026444172410488319e-3,
      0.21743961811521264320e-3,  -0.16431810653676389022e-3,
      0.84418223983852743293e-4,  -0.26190838401581408670e-4,
      0.36899182659531622704e-5};

  if (x < 0.5) {
    // Reflection keeps the approximation in its accurate range.
    return std::numbers::pi /
           (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  double sum = c[0];
  for (std::size_t k = 1; k < c.size(); ++k) {
    sum += c[k] / (z + static_cast<double>(k));
  }
  const double base = z + g + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) *
         std::pow(base, z + 0.5) * std::exp(-base) * sum;
}

inline double beta_fn(double a, double b) {
  return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b);
}

inline double c_ns(int n, FracOrder s, Normalization norm) {
  if (n < 1) {
    throw std::domain_error("c_ns: dimension must be >= 1, got " +
                            std::to_string(n));
  }
  const double sv = s.value();
  const double pow_factor =
      norm == Normalization::PaperTwoPow ? std::pow(2.0, sv)
                                         : std::pow(4.0, sv);
  return sv * pow_factor * gamma_fn(0.5 * (n + 2.0 * sv)) /
         (std::pow(std::numbers::pi, 0.5 * n) * gamma_fn(1.0 - sv));
}

struct ThetaValue {
  int n = 0;
  double value = 0.0;
};

enum class ThetaMethod { ClosedForm, Quadrature };

// Theta_n = integral over R of (1+z^2)^{-(n+2s)/2}
//         = B(1/2, (n+2s-1)/2).
inline ThetaValue theta_n(int n, FracOrder s,
                          ThetaMethod method = ThetaMethod::ClosedForm) {
  if (n < 1) {
    throw std::domain_error("theta_n: dimension must be >= 1, got " +
                            std::to_string(n));
  }
  const double p = 0.5 * (n + 2.0 * s.value());
  if (method == ThetaMethod::ClosedForm) {
    return {n, beta_fn(0.5, p - 0.5)};
  }

  // Near field by adaptive quadrature, far tail by the binomial series of
  // (1+z^{-2})^{-p} integrated term by term from Z.
  const double Z = 10.0;
  auto f = [p](double z) { return std::pow(1.0 + z * z, -p); };
  const double near = 2.0 * quad::gauss_kronrod(f, 0.0, Z, 5e-13).value;

  double tail = 0.0;
  double coeff = 1.0;  // (-1)^j (p)_j / j!
  for (int j = 0; j < 60; ++j) {
    const double term =
        coeff * std::pow(Z, 1.0 - 2.0 * p - 2.0 * j) / (2.0 * p - 1.0 + 2.0 * j);
    tail += term;
    if (std::abs(term) < 1e-17) break;
    coeff *= -(p + j) / (j + 1.0);
  }
  return {n, near + 2.0 * tail};
}

// Residual of the dimensional-reduction identity C_{n,s} Theta_n = C_{n-1,s}.
inline double verify_reduction_identity(int n, FracOrder s,
                                        Normalization norm) {
  if (n < 2) {
    throw std::domain_error(
        "verify_reduction_identity: dimension must be >= 2, got " +
        std::to_string(n));
  }
  const double lhs = c_ns(n, s, norm) * theta_n(n, s).value;
  const double rhs = c_ns(n - 1, s, norm);
  return std::abs(lhs - rhs);
}

// Product of Theta_i for i = 2..n (empty product 1 for n = 1); the constant
// collapsing the last n-1 coordinates of the kernel integral.
inline double theta_product(int n, FracOrder s) {
  double prod = 1.0;
  for (int i = 2; i <= n; ++i) prod *= theta_n(i, s).value;
  return prod;
}

}  // namespace fraclap
