#pragma once
// Linearized moment dynamics around the polarized pole and their closed-form
// steady states.  All rates here are conventional (single, not doubled)
// Lindblad rates: overlaying these curves on the exact-engine output requires
// doubling the rates to match that module's time normalization.  Steady
// states are rate-scale free and depend only on (theta, chi, N).
//
// The steady transverse variance is N times the printed closed form; the
// printed form gives <Sx^2> = 1/4 at theta = 0 where the coherent-state
// value N/4 is required for consistency with the sensitivity formula and
// its small-angle expansion.  The unrepaired forms stay available behind
// the as_printed flag as a documented negative control.

#include <cmath>
#include <limits>
#include <string>

#include "sqz/errors.hpp"
#include "sqz/types.hpp"

namespace sqz {

struct MeanFieldState {
  double d_sz = 0;  // <Sz> + N/2
  double sx2 = 0;
};

namespace detail {

inline void check_theta_quarter(double theta, const char* who) {
  if (!(theta >= 0.0) || theta >= 0.25 * std::acos(-1.0))
    throw DomainError(std::string(who) +
                      ": theta must lie in [0, pi/4); the cavity restoring "
                      "force vanishes at pi/4 (got " +
                      std::to_string(theta) + ")");
}

}  // namespace detail

// Linearization validity: the polarized expansion fails once
// N cos(2 theta) <= 2 sin^2(theta).
inline bool mf_linearization_breakdown(double theta, double n) {
  detail::check_theta_quarter(theta, "mf_linearization_breakdown");
  const double s = std::sin(theta);
  return n * std::cos(2.0 * theta) - 2.0 * s * s <= 0.0;
}

inline MeanFieldState mf_rhs(const MeanFieldState& state, double theta,
                             double gamma_cav, double gamma_spont, double n,
                             bool as_printed = false) {
  detail::check_theta_quarter(theta, "mf_rhs");
  if (gamma_cav < 0 || gamma_spont < 0)
    throw DomainError("mf_rhs: rates must be non-negative");
  const double s2 = std::sin(theta) * std::sin(theta);
  const double c2t = std::cos(2.0 * theta);
  const double s2t = std::sin(2.0 * theta);
  const double sxx_cav = (1.0 - s2t) / (4.0 * c2t) * (as_printed ? 1.0 : n);
  const double sxx_spont = 0.25 * (as_printed ? 1.0 : n);
  MeanFieldState d;
  d.d_sz = -gamma_cav * n * (c2t * state.d_sz - s2) -
           gamma_spont * (state.d_sz - n * s2);
  d.sx2 = -gamma_cav * n * c2t * (state.sx2 - sxx_cav) -
          2.0 * gamma_spont * (1.0 - 0.5 * s2t) * (state.sx2 - sxx_spont);
  return d;
}

// Closed-form steady state at drive angle theta and cooperativity chi.
// chi = +inf selects the cavity-only limit.  Fields with no mean-field
// meaning (sy2, s_total_sq) are NaN.
inline SpinMoments mf_steady(double theta, double chi, double n,
                             bool as_printed = false) {
  detail::check_theta_quarter(theta, "mf_steady");
  if (!(chi > 0.0)) throw DomainError("mf_steady: chi must be positive");
  if (n < 1.0) throw DomainError("mf_steady: N must be >= 1");
  const double s2 = std::sin(theta) * std::sin(theta);
  const double c2t = std::cos(2.0 * theta);
  const double s2t = std::sin(2.0 * theta);
  double d_sz, sx2;
  if (std::isinf(chi)) {
    d_sz = s2 / c2t;
    sx2 = 0.25 * n * (1.0 - s2t) / c2t;
  } else {
    d_sz = n * s2 * (chi + 1.0) / (n * chi * c2t + 1.0);
    const double spont_w = 2.0 * (1.0 - 0.5 * s2t);
    sx2 = 0.25 * n * (n * chi * (1.0 - s2t) + spont_w) /
          (n * chi * c2t + spont_w);
  }
  if (as_printed) sx2 /= n;
  SpinMoments m;
  m.d_sz = d_sz;
  m.sz = d_sz - 0.5 * n;
  m.sx2 = sx2;
  m.sy2 = std::numeric_limits<double>::quiet_NaN();
  m.s_total_sq = std::numeric_limits<double>::quiet_NaN();
  m.dphi = dphi_of(sx2, m.sz);
  return m;
}

// Cavity-only phase sensitivity in closed form,
//   dphi^2 = N (1 - sin 2 theta) cos 2 theta / (N cos 2 theta - 2 sin^2 theta)^2,
// diverging at the linearization breakdown point.
inline double mf_sensitivity_cavity_only(double theta, double n) {
  detail::check_theta_quarter(theta, "mf_sensitivity_cavity_only");
  if (n < 1.0) throw DomainError("mf_sensitivity_cavity_only: N must be >= 1");
  const double s = std::sin(theta);
  const double c2t = std::cos(2.0 * theta);
  const double s2t = std::sin(2.0 * theta);
  const double den = n * c2t - 2.0 * s * s;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(n * (1.0 - s2t) * c2t) / std::abs(den);
}

}  // namespace sqz
