#pragma once
// Laboratory parameters to model rates: adiabatic elimination of cavity and
// excited state turns (g, kappa, gamma, detunings, control Rabi frequencies)
// into the two Lindblad rate scales and the mixing angle.  SI angular
// frequencies (rad/s) throughout; no unit inference.
//
// The excited-state linewidth entering both the spontaneous rate and the
// cooperativity is the renormalized gamma + gamma0, so chi = gamma_cav /
// gamma_spont = g^2 / (kappa (gamma + gamma0)) holds as an identity.
//
// The cavity-elimination validity condition is checked literally as
// kappa >> |delta|.  That direction is unusual (elimination bounds are
// normally stated against the coupling rate); it is reported as a flag,
// never reinterpreted.

#include <cmath>
#include <limits>
#include <string>

#include "sqz/errors.hpp"

namespace sqz {

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m

// g = (dipole/hbar) sqrt(hbar omega_a / (2 eps0 V))
inline double coupling_from_dipole(double dipole, double mode_volume,
                                   double omega_a) {
  if (!(dipole > 0) || !(mode_volume > 0) || !(omega_a > 0))
    throw DomainError("coupling_from_dipole: dipole, volume, frequency must be positive");
  return dipole / kHbar * std::sqrt(kHbar * omega_a / (2.0 * kEpsilon0 * mode_volume));
}

struct CavityAtomParams {
  double g = 0;            // single atom-field coupling, rad/s
  double kappa = 0;        // photon escape rate, rad/s
  double gamma = 0;        // excited-state spontaneous rate, rad/s
  double gamma0 = 0;       // decay into external states, rad/s
  double delta = 0;        // single-photon detuning, rad/s
  double delta_prime = std::numeric_limits<double>::quiet_NaN();  // NaN: same as delta
  double omega_plus = 0;   // control Rabi frequencies, rad/s
  double omega_minus = 0;
};

struct DerivedRates {
  double gamma_cav = 0;
  double gamma_spont = 0;
  double chi = 0;
  double theta = 0;
  // gamma + gamma0 << |delta|, threshold 10x
  bool detuning_dominates_linewidth = false;
  // kappa >> |delta| as printed, threshold 10x; see header note
  bool kappa_dominates_detuning = false;
  double delta_asymmetry = 0;  // delta_prime - delta, metadata only
};

inline DerivedRates derive_rates(const CavityAtomParams& p) {
  if (!(p.g > 0) || !(p.kappa > 0) || !(p.gamma > 0))
    throw DomainError("derive_rates: g, kappa, gamma must be positive");
  if (!(p.gamma0 >= 0)) throw DomainError("derive_rates: gamma0 must be >= 0");
  if (!(std::abs(p.delta) > 0)) throw DomainError("derive_rates: |delta| must be positive");
  if (!(p.omega_plus >= 0) || !(p.omega_minus >= 0))
    throw DomainError("derive_rates: Rabi frequencies must be >= 0");
  if (p.omega_plus == 0 && p.omega_minus == 0)
    throw DomainError("derive_rates: at least one control must drive");

  const double omega_sq = p.omega_plus * p.omega_plus + p.omega_minus * p.omega_minus;
  const double delta_sq = p.delta * p.delta;
  const double linewidth = p.gamma + p.gamma0;

  DerivedRates out;
  out.gamma_cav = p.g * p.g * omega_sq / (delta_sq * p.kappa);
  out.gamma_spont = linewidth * omega_sq / delta_sq;
  out.chi = p.g * p.g / (p.kappa * linewidth);
  out.theta = std::atan2(p.omega_plus, p.omega_minus);
  out.detuning_dominates_linewidth = std::abs(p.delta) >= 10.0 * linewidth;
  out.kappa_dominates_detuning = p.kappa >= 10.0 * std::abs(p.delta);
  out.delta_asymmetry = std::isnan(p.delta_prime) ? 0.0 : p.delta_prime - p.delta;
  return out;
}

// Two-pathway Raman amplitude g O/D + g2 O2/(D + d_hfs).  Signs carry
// through: pathways add when delta and delta + delta_hfs share sign.
inline double raman_rate_total(double g, double g2, double omega_ctrl,
                               double omega_ctrl2, double delta,
                               double delta_hfs) {
  if (delta == 0) throw DomainError("raman_rate_total: on resonance, delta = 0");
  const double d2 = delta + delta_hfs;
  if (d2 == 0) throw DomainError("raman_rate_total: second pathway on resonance");
  return g * omega_ctrl / delta + g2 * omega_ctrl2 / d2;
}

struct RepumpResult {
  double gamma_out_plus = 0;
  double gamma_out_minus = 0;
  double gamma_repump = 0;
  double external_fraction = 0;  // NaN when gamma_repump vanishes
  bool weak_driving_ok = false;  // omega_repump <= gamma0
};

inline RepumpResult repump_populations(double omega_repump, double gamma0,
                                       double gamma_plus, double gamma_minus,
                                       double omega_plus, double omega_minus,
                                       double delta_plus, double delta_minus) {
  if (!(gamma0 >= 0)) throw DomainError("repump_populations: gamma0 must be >= 0");
  if (!(omega_repump >= 0))
    throw DomainError("repump_populations: repump drive must be >= 0");
  if (!(gamma_plus + gamma_minus > 0))
    throw DomainError("repump_populations: need a nonzero ground-state linewidth");
  if ((omega_plus != 0 && delta_plus == 0) || (omega_minus != 0 && delta_minus == 0))
    throw DomainError("repump_populations: driven leg on resonance");

  RepumpResult out;
  auto leg = [gamma0](double omega, double delta) {
    if (omega == 0) return 0.0;
    const double a = omega / delta;
    return gamma0 * a * a;
  };
  out.gamma_out_plus = leg(omega_plus, delta_plus);
  out.gamma_out_minus = leg(omega_minus, delta_minus);
  out.gamma_repump = omega_repump * omega_repump / (gamma_plus + gamma_minus);
  out.external_fraction =
      out.gamma_repump > 0
          ? (out.gamma_out_plus + out.gamma_out_minus) / out.gamma_repump
          : std::numeric_limits<double>::quiet_NaN();
  out.weak_driving_ok = omega_repump <= gamma0;
  return out;
}

}  // namespace sqz
