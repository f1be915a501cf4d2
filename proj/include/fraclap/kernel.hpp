#pragma once

#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include <fftw3.h>

#include "fraclap/constants.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

// Offset-indexed quadrature weights for the integral kernel |Y|^{-(d+2s)}.
//
// q holds one weight per quadrant offset (|k1|,|k2|); the weight of a lattice
// offset k is q[|k1|][|k2|], so the table is shared by every row of the
// induced operator. Couplings beyond the offset box enter only through the
// zero exterior extension and are carried by two scalars:
//   beyond_box  exact integral over {outside the offset box, |Y| <= r_max}
//   tail        analytic integral over {|Y| > r_max}
struct KernelWeights {
  int dim = 1;
  double s = 0.5;
  double h = 0.0;
  Normalization norm = Normalization::StandardFourPow;
  double c = 0.0;  // c_ns(dim, s, norm)

  int n1 = 0, n2 = 1;      // quadrant extents (interior node counts)
  std::vector<double> q;   // q[d1*n2+d2], q[0] = 0
  double r_max = 0.0;
  double tail = 0.0;
  double beyond_box = 0.0;
  double box_sum = 0.0;    // full-lattice sum of boxed weights
  double wtot = 0.0;       // box_sum + beyond_box + tail

  UniformGrid grid;

  double qat(int d1, int d2) const noexcept {
    return q[static_cast<std::size_t>(d1) * static_cast<std::size_t>(n2) +
             static_cast<std::size_t>(d2)];
  }
  // Diagonal and off-diagonal entries of the induced matrix row.
  double diagonal() const noexcept { return c * wtot; }
  double coupling(int d1, int d2) const noexcept { return -c * qat(d1, d2); }
};

namespace detail {

// Exact kernel integral over the unit-coordinate cell at offset (d1,d2),
// d1 >= d2 handled by symmetry of the caller; radial part analytic.
inline double cell_exact_2d(int d1, int d2, double two_s) {
  if (d2 == 0) {
    return 2.0 * quad::rect_integral_beyond_radius(d1 - 0.5, d1 + 0.5, 0.0,
                                                   0.5, 0.0, two_s);
  }
  return quad::rect_integral_beyond_radius(d1 - 0.5, d1 + 0.5, d2 - 0.5,
                                           d2 + 0.5, 0.0, two_s);
}

// 3 or 5 point tensor Gauss of |Y|^{-(dim+2s)} over the cell centered at
// (k1 h, k2 h).
inline double cell_gauss(int dim, double h, int k1, int k2, double s,
                         int npts) {
  const auto& xs = quad::gauss_nodes(npts);
  const auto& ws = quad::gauss_weights(npts);
  const double c1 = k1 * h, c2 = k2 * h;
  const double half = 0.5 * h;
  double sum = 0.0;
  if (dim == 1) {
    const double p = 1.0 + 2.0 * s;
    for (std::size_t a = 0; a < xs.size(); ++a) {
      const double y = c1 + half * xs[a];
      sum += ws[a] * std::pow(std::abs(y), -p);
    }
    return sum * half;
  }
  const double p = 1.0 + s;  // |Y|^{-(2+2s)} = (y1^2+y2^2)^{-(1+s)}
  for (std::size_t a = 0; a < xs.size(); ++a) {
    const double y1 = c1 + half * xs[a];
    for (std::size_t b = 0; b < xs.size(); ++b) {
      const double y2 = c2 + half * xs[b];
      sum += ws[a] * ws[b] * std::pow(y1 * y1 + y2 * y2, -p);
    }
  }
  return sum * half * half;
}

}  // namespace detail

// Builds the weight table for a grid.
//
// Near-origin rule: the O(|Y|^2) cancellation of the second difference lets
// the origin cell and the residual transverse curvature of the two axis
// strips |Y_a| <= h/2 be folded onto the unit-offset weights through exact
// second-moment integrals; every other cell carries its kernel integral
// directly (unit cells exactly, via the radial-analytic polar form; |k|_inf
// >= 2 by tensor 3-point Gauss). The strip moment reduces through the same
// Theta identity that connects consecutive dimensions, so the weights of a
// 2D grid collapsed along the cylinder axis reproduce the 1D weights to
// quadrature precision; extruded fields then see the cross-section operator
// exactly.
inline KernelWeights assemble_weights(
    const UniformGrid& grid, FracOrder s, Normalization norm,
    std::optional<double> r_max_override = std::nullopt) {
  KernelWeights w;
  w.dim = grid.dim();
  w.s = s.value();
  w.h = grid.h();
  w.norm = norm;
  w.c = c_ns(w.dim, s, norm);
  w.grid = grid;
  w.n1 = grid.n1();
  w.n2 = grid.dim() == 2 ? grid.n2() : 1;

  const double sv = w.s;
  const double h = w.h;
  const double ext1 = grid.axis(0).hi - grid.axis(0).lo;
  const double diam =
      w.dim == 2 ? std::hypot(ext1, grid.axis(1).hi - grid.axis(1).lo) : ext1;
  w.r_max = r_max_override.value_or(diam + 2.0 * h);
  if (w.r_max < diam) {
    throw GeometryError("assemble_weights: r_max " + std::to_string(w.r_max) +
                        " is below the domain diameter " +
                        std::to_string(diam));
  }

  w.q.assign(static_cast<std::size_t>(w.n1) * static_cast<std::size_t>(w.n2),
             0.0);

  if (w.dim == 1) {
    // Cells are intervals; their kernel integrals are analytic. The origin
    // cell enters through its second moment on the unit coupling.
    auto cell_1d = [&](int k) {
      return (std::pow((k - 0.5) * h, -2.0 * sv) -
              std::pow((k + 0.5) * h, -2.0 * sv)) /
             (2.0 * sv);
    };
    const double origin_moment =
        std::pow(0.5 * h, 2.0 - 2.0 * sv) / (2.0 - 2.0 * sv);
    for (int k = 1; k < w.n1; ++k) {
      w.q[static_cast<std::size_t>(k)] = cell_1d(k);
    }
    if (w.n1 >= 2) w.q[1] += origin_moment / (h * h);
    w.box_sum = 0.0;
    for (int k = 1; k < w.n1; ++k) w.box_sum += 2.0 * w.q[k];
    const double box_edge = (w.n1 - 1) * h + 0.5 * h;
    w.tail = std::pow(w.r_max, -2.0 * sv) / sv;
    w.beyond_box =
        (std::pow(box_edge, -2.0 * sv) - std::pow(w.r_max, -2.0 * sv)) / sv;
    w.wtot = w.box_sum + w.beyond_box + w.tail;
    return w;
  }

  // d = 2. Unit cells exactly; the strip moment is the 1D origin moment
  // scaled by Theta_2 (the reduction identity in discrete form).
  const double two_s = 2.0 * sv;
  const double cell_axis =
      2.0 * quad::rect_integral_beyond_radius(0.5, 1.5, 0.0, 0.5, 0.0, two_s);
  const double cell_diag =
      quad::rect_integral_beyond_radius(0.5, 1.5, 0.5, 1.5, 0.0, two_s);
  const double theta2 = theta_n(2, s).value;
  const double strip_moment =
      theta2 * std::pow(0.5 * h, 2.0 - 2.0 * sv) / (2.0 - 2.0 * sv);
  const double hs = std::pow(h, -two_s);

  auto set = [&](int d1, int d2, double val) {
    w.q[static_cast<std::size_t>(d1) * static_cast<std::size_t>(w.n2) +
        static_cast<std::size_t>(d2)] = val;
  };
  if (w.n1 >= 2) set(1, 0, cell_axis * hs + strip_moment / (h * h));
  if (w.n2 >= 2) set(0, 1, cell_axis * hs + strip_moment / (h * h));
  if (w.n1 >= 2 && w.n2 >= 2) set(1, 1, cell_diag * hs);

  // Tensor Gauss error decays like |k|^{-6}; below the crossover the exact
  // polar form keeps the relative weight error at quadrature precision,
  // which the dimensional-reduction consistency of extruded fields needs.
  constexpr int exact_radius = 12;
  parallel_for(static_cast<std::size_t>(w.n1), [&](std::size_t lo,
                                                   std::size_t hi) {
    for (std::size_t id1 = lo; id1 < hi; ++id1) {
      const int d1 = static_cast<int>(id1);
      for (int d2 = 0; d2 < w.n2; ++d2) {
        if (std::max(d1, d2) < 2) continue;
        double val;
        if (std::max(d1, d2) <= exact_radius) {
          val = hs * (d1 >= d2 ? detail::cell_exact_2d(d1, d2, two_s)
                               : detail::cell_exact_2d(d2, d1, two_s));
        } else {
          val = detail::cell_gauss(2, h, d1, d2, sv, 3);
        }
        set(d1, d2, val);
      }
    }
  });

  w.box_sum = 0.0;
  for (int d1 = 0; d1 < w.n1; ++d1) {
    for (int d2 = 0; d2 < w.n2; ++d2) {
      if (d1 == 0 && d2 == 0) continue;
      const double mult = (d1 > 0 ? 2.0 : 1.0) * (d2 > 0 ? 2.0 : 1.0);
      w.box_sum += mult * w.qat(d1, d2);
    }
  }
  const double bx = (w.n1 - 1) * h + 0.5 * h;
  const double by = (w.n2 - 1) * h + 0.5 * h;
  w.tail = std::numbers::pi * std::pow(w.r_max, -two_s) / sv;
  w.beyond_box = quad::plane_integral_beyond_box(bx, by, two_s) - w.tail;
  w.wtot = w.box_sum + w.beyond_box + w.tail;
  return w;
}

enum class MatvecBackend { Auto, Direct, Fft };

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Circular convolution with the symmetric quadrant kernel via zero padding.
class FftConv {
public:
  explicit FftConv(const KernelWeights& w)
      : n1_(w.n1), n2_(w.n2), p1_(pad(2 * w.n1 - 1)), p2_(pad(2 * w.n2 - 1)) {
    const std::size_t rsize =
        static_cast<std::size_t>(p1_) * static_cast<std::size_t>(p2_);
    csize_ = static_cast<std::size_t>(p1_) *
             static_cast<std::size_t>(p2_ / 2 + 1);
    rbuf_ = fftw_alloc_real(rsize);
    cbuf_ = fftw_alloc_complex(csize_);
    khat_ = fftw_alloc_complex(csize_);
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fwd_ = fftw_plan_dft_r2c_2d(p1_, p2_, rbuf_, cbuf_, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_c2r_2d(p1_, p2_, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    // Kernel image: offset (d1,d2) wrapped onto the padded torus.
    std::memset(rbuf_, 0, rsize * sizeof(double));
    for (int d1 = -(n1_ - 1); d1 <= n1_ - 1; ++d1) {
      const int i = (d1 + p1_) % p1_;
      for (int d2 = -(n2_ - 1); d2 <= n2_ - 1; ++d2) {
        const int j = (d2 + p2_) % p2_;
        rbuf_[static_cast<std::size_t>(i) * p2_ + j] =
            w.qat(std::abs(d1), std::abs(d2));
      }
    }
    fftw_execute(fwd_);
    std::memcpy(khat_, cbuf_, csize_ * sizeof(fftw_complex));
  }

  FftConv(const FftConv&) = delete;
  FftConv& operator=(const FftConv&) = delete;

  ~FftConv() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
    fftw_free(khat_);
  }

  // out[i] = sum_j q(i-j) u[j] over the n1 x n2 index box.
  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t rsize =
        static_cast<std::size_t>(p1_) * static_cast<std::size_t>(p2_);
    std::memset(rbuf_, 0, rsize * sizeof(double));
    for (int i = 0; i < n1_; ++i) {
      std::memcpy(rbuf_ + static_cast<std::size_t>(i) * p2_,
                  u.data() + static_cast<std::size_t>(i) * n2_,
                  static_cast<std::size_t>(n2_) * sizeof(double));
    }
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < csize_; ++k) {
      const double re = cbuf_[k][0] * khat_[k][0] - cbuf_[k][1] * khat_[k][1];
      const double im = cbuf_[k][0] * khat_[k][1] + cbuf_[k][1] * khat_[k][0];
      cbuf_[k][0] = re;
      cbuf_[k][1] = im;
    }
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(rsize);
    out.resize(static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_));
    for (int i = 0; i < n1_; ++i) {
      for (int j = 0; j < n2_; ++j) {
        out[static_cast<std::size_t>(i) * n2_ + j] =
            rbuf_[static_cast<std::size_t>(i) * p2_ + j] * scale;
      }
    }
  }

private:
  static int pad(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
  }

  int n1_, n2_, p1_, p2_;
  std::size_t csize_ = 0;
  double* rbuf_ = nullptr;
  fftw_complex* cbuf_ = nullptr;
  fftw_complex* khat_ = nullptr;
  fftw_plan fwd_{}, bwd_{};
};

}  // namespace detail

// Matrix-free realization of the discrete operator
//   (A u)_i = c * ( wtot * u_i - sum_j q(i-j) u_j ).
// The direct path is the O(N^2) correctness baseline; the FFT path must
// match it to 1e-10 and is selected automatically for large grids.
class FractionalOperator {
public:
  explicit FractionalOperator(KernelWeights w,
                              MatvecBackend backend = MatvecBackend::Auto)
      : w_(std::move(w)), backend_(backend) {}

  const KernelWeights& weights() const noexcept { return w_; }

  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    const bool use_fft =
        backend_ == MatvecBackend::Fft ||
        (backend_ == MatvecBackend::Auto && in.size() >= 4096);
    if (use_fft) {
      if (!fft_) fft_ = std::make_unique<detail::FftConv>(w_);
      fft_->apply(in, out);
      const double c = w_.c, wtot = w_.wtot;
      for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = c * (wtot * in[k] - out[k]);
      }
      return;
    }
    apply_direct(in, out);
  }

  GridFunction apply(const GridFunction& u) const {
    if (!u.grid.same_layout(w_.grid)) {
      throw GeometryError("apply_operator: grid does not match the weights");
    }
    GridFunction out = GridFunction::zeros(u.grid);
    apply(u.v, out.v);
    return out;
  }

private:
  void apply_direct(const std::vector<double>& in,
                    std::vector<double>& out) const {
    const int n1 = w_.n1, n2 = w_.n2;
    out.resize(in.size());
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t lo,
                                                   std::size_t hi) {
      for (std::size_t i1 = lo; i1 < hi; ++i1) {
        for (int i2 = 0; i2 < n2; ++i2) {
          double conv = 0.0;
          for (int j1 = 0; j1 < n1; ++j1) {
            const double* qrow =
                w_.q.data() +
                static_cast<std::size_t>(std::abs(static_cast<int>(i1) - j1)) *
                    static_cast<std::size_t>(n2);
            const double* urow =
                in.data() + static_cast<std::size_t>(j1) *
                                static_cast<std::size_t>(n2);
            for (int j2 = 0; j2 < n2; ++j2) {
              conv += qrow[std::abs(i2 - j2)] * urow[j2];
            }
          }
          out[i1 * static_cast<std::size_t>(n2) + i2] =
              w_.c * (w_.wtot * in[i1 * static_cast<std::size_t>(n2) + i2] -
                      conv);
        }
      }
    });
  }

  KernelWeights w_;
  MatvecBackend backend_;
  mutable std::unique_ptr<detail::FftConv> fft_;
};

inline GridFunction apply_operator(const KernelWeights& w,
                                   const GridFunction& u,
                                   MatvecBackend backend = MatvecBackend::Auto) {
  return FractionalOperator(w, backend).apply(u);
}

// Energy form (c/2) * double sum of q_k (u_i - u_j)^2 over ordered lattice
// pairs plus the exterior terms, consistent with the double integral over
// R^d x R^d under zero extension. Algebraically equal to <u, Au>_h.
inline double gagliardo_seminorm_sq(const GridFunction& u,
                                    const KernelWeights& w) {
  if (!u.grid.same_layout(w.grid)) {
    throw GeometryError("gagliardo_seminorm_sq: grid mismatch");
  }
  const int n1 = w.n1, n2 = w.n2;
  double s1 = 0.0, s2 = 0.0, usq = 0.0;
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double ui = u.v[u.grid.index(i1, i2)];
      usq += ui * ui;
      for (int k1 = -(n1 - 1); k1 <= n1 - 1; ++k1) {
        const int j1 = i1 + k1;
        const bool in1 = j1 >= 0 && j1 < n1;
        const double* qrow = w.q.data() +
                             static_cast<std::size_t>(std::abs(k1)) *
                                 static_cast<std::size_t>(n2);
        for (int k2 = -(n2 - 1); k2 <= n2 - 1; ++k2) {
          if (k1 == 0 && k2 == 0) continue;
          const int j2 = i2 + k2;
          const double qv = qrow[std::abs(k2)];
          if (in1 && j2 >= 0 && j2 < n2) {
            const double d = ui - u.v[u.grid.index(j1, j2)];
            s1 += qv * d * d;
          } else {
            s1 += qv * ui * ui;
            s2 += qv * ui * ui;
          }
        }
      }
    }
  }
  const double pair_sum = s1 + s2 + 2.0 * w.beyond_box * usq;
  return 0.5 * w.c * (pair_sum + 2.0 * w.tail * usq) *
         u.grid.cell_measure();
}

// Fractional centered-difference weights, the independent 1D discretization:
//   g_0 = Gamma(2s+1)/Gamma(s+1)^2,  g_{k+1} = g_k (k-s)/(k+1+s).
inline std::vector<double> centered_difference_weights(FracOrder s, int kmax) {
  const double sv = s.value();
  std::vector<double> g(static_cast<std::size_t>(kmax) + 1);
  g[0] = gamma_fn(2.0 * sv + 1.0) / std::pow(gamma_fn(sv + 1.0), 2);
  for (int k = 0; k < kmax; ++k) {
    g[static_cast<std::size_t>(k) + 1] =
        g[static_cast<std::size_t>(k)] * (k - sv) / (k + 1.0 + sv);
  }
  return g;
}

inline GridFunction apply_centered_difference(FracOrder s,
                                              const GridFunction& u) {
  if (u.grid.dim() != 1) {
    throw GeometryError("apply_centered_difference: 1D only");
  }
  const int n = u.grid.n1();
  const auto g = centered_difference_weights(s, n - 1);
  const double scale = std::pow(u.grid.h(), -2.0 * s.value());
  GridFunction out = GridFunction::zeros(u.grid);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += g[static_cast<std::size_t>(std::abs(i - j))] *
             u.v[static_cast<std::size_t>(j)];
    }
    out.v[static_cast<std::size_t>(i)] = scale * acc;
  }
  return out;
}

}  // namespace fraclap
