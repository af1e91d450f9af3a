#pragma once
// Embedded Dormand-Prince 5(4) pair with FSAL and adaptive step control.
// The state is a dense complex matrix; the right-hand side is autonomous.
// Error norm: RMS over entries of |e_ij| / (atol + rtol * max(|y_ij|, |y'_ij|)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "sqz/errors.hpp"
#include "sqz/types.hpp"

namespace sqz {

namespace detail {

// In-place y <- (y + y†)/2; returns the largest entrywise asymmetry removed.
inline double hermitize(DMat& rho) {
  const int dim = static_cast<int>(rho.rows());
  constexpr int B = 32;
  double worst = 0.0;
  for (int jb = 0; jb < dim; jb += B) {
    const int je = std::min(jb + B, dim);
    for (int ib = 0; ib <= jb; ib += B) {
      const int ie = std::min(ib + B, dim);
      for (int j = jb; j < je; ++j) {
        const int itop = std::min(ie, j + 1);
        for (int i = ib; i < itop; ++i) {
          const cd x = rho(i, j);
          const cd yc = std::conj(rho(j, i));
          worst = std::max(worst, std::abs(x - yc));
          const cd avg = 0.5 * (x + yc);
          rho(i, j) = avg;
          rho(j, i) = std::conj(avg);
        }
      }
    }
  }
  return worst;
}

}  // namespace detail

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double safety = 0.9;
  double min_shrink = 0.2;  // clamp on the step-ratio controller
  double max_grow = 5.0;
  double h_init = 0.0;  // 0 = automatic
  // Project the state back onto the Hermitian subspace after every accepted
  // step.  The folded master-equation right-hand side is contractive only on
  // that subspace; the anti-Hermitian complement is amplified (up to
  // exp(2 gamma ||J||^2 t)) from rounding noise and must not be allowed to
  // accumulate across steps.  Ignored for non-square states.
  bool hermitize_steps = false;
};

struct IntegratorStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t rhs_evals = 0;
};

// Rhs: void(const DMat& y, DMat& dydt).
template <class Rhs>
class Dp54 {
 public:
  Dp54(Rhs rhs, Eigen::Index rows, Eigen::Index cols, IntegratorOptions opt = {})
      : rhs_(std::move(rhs)), opt_(opt) {
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_})
      m->resize(rows, cols);
  }

  // Drop the cached derivative (call after modifying y outside the stepper).
  void restart() { fsal_ = false; }

  // f(y) at the current state; valid right after integrate_to.
  const DMat& derivative() const { return k1_; }

  const IntegratorStats& stats() const { return stats_; }

  // Advance y from t to exactly t_end.
  void integrate_to(DMat& y, double& t, double t_end) {
    if (t_end <= t) return;
    if (!fsal_) {
      rhs_(y, k1_);
      ++stats_.rhs_evals;
      fsal_ = true;
    }
    if (h_ <= 0.0) h_ = opt_.h_init > 0.0 ? opt_.h_init : initial_step(y);

    while (t < t_end) {
      if (!fsal_) {
        rhs_(y, k1_);
        ++stats_.rhs_evals;
        fsal_ = true;
      }
      const double remaining = t_end - t;
      const bool clipped = h_ >= remaining;
      const double h = clipped ? remaining : h_;
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
        throw IntegrationError("step size underflow at t = " + std::to_string(t));

      ytmp_ = y + (h * a21) * k1_;
      rhs_(ytmp_, k2_);
      ytmp_ = y + (h * a31) * k1_ + (h * a32) * k2_;
      rhs_(ytmp_, k3_);
      ytmp_ = y + (h * a41) * k1_ + (h * a42) * k2_ + (h * a43) * k3_;
      rhs_(ytmp_, k4_);
      ytmp_ = y + (h * a51) * k1_ + (h * a52) * k2_ + (h * a53) * k3_ + (h * a54) * k4_;
      rhs_(ytmp_, k5_);
      ytmp_ = y + (h * a61) * k1_ + (h * a62) * k2_ + (h * a63) * k3_ + (h * a64) * k4_ +
              (h * a65) * k5_;
      rhs_(ytmp_, k6_);
      ynew_ = y + (h * b1) * k1_ + (h * b3) * k3_ + (h * b4) * k4_ + (h * b5) * k5_ +
              (h * b6) * k6_;
      rhs_(ynew_, k7_);
      stats_.rhs_evals += 6;

      const double err = error_norm(y, h);
      if (err <= 1.0) {
        t = clipped ? t_end : t + h;
        y.swap(ynew_);
        k1_.swap(k7_);
        ++stats_.accepted;
        if (opt_.hermitize_steps && y.rows() == y.cols()) {
          // FSAL keeps f(pre-projection y); refresh it only when the
          // projection actually moved the state.
          if (detail::hermitize(y) > opt_.atol) fsal_ = false;
        }
        const double grow =
            err == 0.0 ? opt_.max_grow
                       : std::min(opt_.max_grow,
                                  std::max(opt_.min_shrink,
                                           opt_.safety * std::pow(err, -0.2)));
        const double h_next = h * grow;
        h_ = clipped ? std::max(h_, h_next) : h_next;
      } else {
        ++stats_.rejected;
        h_ = h * std::max(opt_.min_shrink, opt_.safety * std::pow(err, -0.2));
      }
    }
  }

 private:
  // Scaled-RMS error of the embedded difference, without materializing it.
  double error_norm(const DMat& y, double h) const {
    const std::ptrdiff_t size = y.size();
    const cd *p1 = k1_.data(), *p3 = k3_.data(), *p4 = k4_.data(), *p5 = k5_.data(),
             *p6 = k6_.data(), *p7 = k7_.data();
    const cd *py = y.data(), *pn = ynew_.data();
    double acc = 0.0;
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      const cd e = h * (d1 * p1[i] + d3 * p3[i] + d4 * p4[i] + d5 * p5[i] +
                        d6 * p6[i] + d7 * p7[i]);
      const double sc =
          opt_.atol + opt_.rtol * std::max(std::abs(py[i]), std::abs(pn[i]));
      acc += std::norm(e) / (sc * sc);
    }
    return std::sqrt(acc / static_cast<double>(size));
  }

  double initial_step(const DMat& y) const {
    double ny = 0.0, nf = 0.0;
    const std::ptrdiff_t size = y.size();
    const cd *py = y.data(), *pf = k1_.data();
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(py[i]);
      ny += std::norm(py[i]) / (sc * sc);
      nf += std::norm(pf[i]) / (sc * sc);
    }
    ny = std::sqrt(ny / size);
    nf = std::sqrt(nf / size);
    if (ny < 1e-10 || nf < 1e-10) return 1e-6;
    return 0.01 * ny / nf;
  }

  // Dormand-Prince coefficients.
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // 5th-order minus 4th-order weights (error estimator).
  static constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695, d4 = 71.0 / 1920,
                          d5 = -17253.0 / 339200, d6 = 22.0 / 525, d7 = -1.0 / 40;

  Rhs rhs_;
  IntegratorOptions opt_;
  IntegratorStats stats_;
  DMat k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  double h_ = 0.0;
  bool fsal_ = false;
};

}  // namespace sqz
