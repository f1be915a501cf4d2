#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fraclap/errors.hpp"

namespace fraclap::quad {

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval, absolute tolerance.
template <typename F>
Result gauss_kronrod(const F& f, double a, double b, double abs_tol,
                     unsigned max_depth = 15) {
  Result r;
  if (a == b) return r;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  // boost's tolerance is relative to the L1 norm; request tight and check
  // the returned error estimate ourselves. Accepted when the absolute
  // target is met or the estimate is at 1e-12 relative accuracy.
  r.value = GK::integrate(f, a, b, max_depth, 1e-13, &r.error_estimate);
  if (!(r.error_estimate <= std::max(abs_tol, 1e-12 * std::abs(r.value)))) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "gauss_kronrod: abs tol %.3e not met, achieved %.3e",
                  abs_tol, r.error_estimate);
    throw QuadratureError(msg, r.error_estimate, abs_tol);
  }
  return r;
}

// tanh-sinh rule; tolerant of integrable endpoint singularities.
template <typename F>
double tanh_sinh(const F& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

// GK over [pts.front(), pts.back()] split at the interior breakpoints.
template <typename F>
double piecewise(const F& f, const std::vector<double>& pts, double abs_tol) {
  if (pts.size() < 2) return 0.0;
  const double per_piece = abs_tol / static_cast<double>(pts.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] > pts[i]) {
      sum += gauss_kronrod(f, pts[i], pts[i + 1], per_piece).value;
    }
  }
  return sum;
}

namespace detail {

// Radial primitive of r^{-p} r dr in d=2 polar form: for the kernel
// r^{-(2+2q)} the angular slice integral over r in [r0, r1] is
// (r0^{-2q} - r1^{-2q}) / (2q).
inline double radial_slice(double r0, double r1, double two_q) {
  return (std::pow(r0, -two_q) - std::pow(r1, -two_q)) / two_q;
}

}  // namespace detail

// Integral of |Y|^{-(2+two_q)} over the part of the axis-aligned rectangle
// [x0,x1]x[y0,y1] (first quadrant, 0 <= x0 < x1, 0 <= y0 < y1) lying outside
// the circle of radius rcut. The radial integral is analytic; the angular
// integral is split at every constraint crossing and done by adaptive GK.
inline double rect_integral_beyond_radius(double x0, double x1, double y0,
                                          double y1, double rcut,
                                          double two_q) {
  const double far = std::hypot(x1, y1);
  if (far <= rcut) return 0.0;

  const double th_lo = std::atan2(y0, x1);
  const double th_hi = std::atan2(y1, x0 > 0.0 ? x0 : 0.0);

  std::vector<double> brk = {th_lo, th_hi};
  auto push = [&](double t) {
    if (t > th_lo + 1e-15 && t < th_hi - 1e-15) brk.push_back(t);
  };
  push(std::atan2(y1, x1));
  push(std::atan2(y0, x0 > 0.0 ? x0 : 1e-300));
  if (rcut > 0.0) {
    for (double c : {y0, y1}) {
      if (c > 0.0 && c < rcut) push(std::asin(c / rcut));
    }
    for (double c : {x0, x1}) {
      if (c > 0.0 && c < rcut) push(std::acos(c / rcut));
    }
  }
  std::sort(brk.begin(), brk.end());

  auto slice = [&](double th) {
    const double ct = std::cos(th), st = std::sin(th);
    double r_lo = rcut;
    if (ct > 0.0 && x0 > 0.0) r_lo = std::max(r_lo, x0 / ct);
    if (st > 0.0 && y0 > 0.0) r_lo = std::max(r_lo, y0 / st);
    double r_hi = far;
    if (ct > 1e-300) r_hi = std::min(r_hi, x1 / ct);
    if (st > 1e-300) r_hi = std::min(r_hi, y1 / st);
    if (r_hi <= r_lo) return 0.0;
    return detail::radial_slice(r_lo, r_hi, two_q);
  };

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    if (brk[i + 1] > brk[i] + 1e-15) {
      total += gauss_kronrod(slice, brk[i], brk[i + 1], 1e-12).value;
    }
  }
  return total;
}

// Integral of |Y|^{-(2+two_q)} over the full plane outside the centered
// rectangle [-bx,bx]x[-by,by]; exact up to the angular GK tolerance.
inline double plane_integral_beyond_box(double bx, double by, double two_q) {
  const double th_split = std::atan2(by, bx);
  auto slice_x = [&](double th) {
    return detail::radial_slice(bx / std::cos(th), 1e300, two_q);
  };
  auto slice_y = [&](double th) {
    return detail::radial_slice(by / std::sin(th), 1e300, two_q);
  };
  const double quadrant =
      gauss_kronrod(slice_x, 0.0, th_split, 1e-12).value +
      gauss_kronrod(slice_y, th_split, 0.5 * std::numbers::pi, 1e-12).value;
  return 4.0 * quadrant;
}

// Tensor Gauss-Legendre nodes/weights on [-1,1].
inline const std::vector<double>& gauss_nodes(int n) {
  static const std::vector<double> g3 = {-0.7745966692414834, 0.0,
                                         0.7745966692414834};
  static const std::vector<double> g5 = {
      -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
      0.9061798459386640};
  return n == 3 ? g3 : g5;
}

inline const std::vector<double>& gauss_weights(int n) {
  static const std::vector<double> w3 = {0.5555555555555556,
                                         0.8888888888888888,
                                         0.5555555555555556};
  static const std::vector<double> w5 = {
      0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
      0.4786286704993665, 0.2369268850561891};
  return n == 3 ? w3 : w5;
}

}  // namespace fraclap::quad
