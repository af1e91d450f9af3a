#pragma once
// Exact dark state of the collective jump J = sin(theta) S+ + cos(theta) S-
// in the symmetric sector, its spin moments, and the two reference
// sensitivity limits.

#include <cmath>
#include <string>
#include <vector>

#include "sqz/errors.hpp"
#include "sqz/types.hpp"

namespace sqz {

// Amplitudes over Dicke index m = 0..N (Sz eigenvalue m - N/2).
struct SymmetricState {
  DVec c;
  EnsembleSize n;
};

struct DarkStateOptions {
  // Debug: drop the alternating sign of the recursion (the literal sign-free
  // form).  The resulting vector is NOT annihilated by J; it exists as the
  // negative control for the convention self-consistency check.
  bool sign_free = false;
};

// Dark state amplitudes: c_{2n} = (-r)^n C(N/2, n) C(N, 2n)^{-1/2} c_0,
// odd amplitudes zero, normalized, phase fixed so the first nonzero
// amplitude is positive.
//
// Built as a running product of exact neighbor ratios
//   c_{2n}/c_{2n-2} = -r * (S-n+1)/n * sqrt[ 2n(2n-1) / ((N-2n+2)(N-2n+1)) ],
// each factor a binomial quotient, so no large intermediates appear; the
// amplitude sequence itself is bounded by r^n.  r > 1 is handled by the
// mirror construction (build at 1/r, reverse m -> N-m), which the direct
// product would overflow on.
inline SymmetricState dark_state(EnsembleSize n, double r, DarkStateOptions opt = {}) {
  if (n.n_atoms % 2 != 0)
    throw OddEnsembleError(
        "dark_state: no symmetric-sector dark state exists for odd N = " +
        std::to_string(n.n_atoms) + " (annihilation kernel is empty)");
  if (std::isnan(r) || r < 0.0)
    throw DomainError("dark_state: drive ratio must satisfy r >= 0");

  const int N = n.n_atoms;
  SymmetricState st{DVec::Zero(N + 1), n};

  const bool mirror = r > 1.0;
  const double rr = std::isinf(r) ? 0.0 : (mirror ? 1.0 / r : r);

  const double s = 0.5 * N;
  double amp = 1.0;
  st.c[0] = amp;
  for (int k = 1; 2 * k <= N; ++k) {
    const double ratio = (opt.sign_free ? rr : -rr) * (s - k + 1) / k *
                         std::sqrt((2.0 * k) * (2.0 * k - 1.0) /
                                   ((N - 2.0 * k + 2.0) * (N - 2.0 * k + 1.0)));
    amp *= ratio;
    st.c[2 * k] = amp;
  }
  if (mirror || std::isinf(r)) st.c.reverseInPlace();

  st.c /= st.c.norm();
  for (int m = 0; m <= N; ++m) {
    if (st.c[m] != cd(0.0, 0.0)) {
      if (st.c[m].real() < 0.0) st.c = -st.c;
      break;
    }
  }
  return st;
}

// <m+1|S+|m> in the symmetric sector, clamped to zero at the ladder top.
inline double ladder_ap(double s, int m) {
  const double mz = m - s;
  const double v = s * (s + 1.0) - mz * (mz + 1.0);
  return v <= 0.0 ? 0.0 : std::sqrt(v);
}

// Moments via ladder contractions (the state is tridiagonal/pentadiagonal
// in the quadratic collective operators).  Throws DegenerateError when
// <Sz> is numerically zero (dphi undefined).
inline SpinMoments moments(const SymmetricState& st) {
  const int N = st.n.n_atoms;
  const double s = st.n.total_spin();
  if (std::abs(st.c.norm() - 1.0) > 1e-10)
    throw DomainError("moments: state not normalized");

  std::vector<double> ap(N + 1);  // ap[m] = <m+1|S+|m>
  for (int m = 0; m <= N; ++m) ap[m] = ladder_ap(s, m);

  double sz = 0, sz2 = 0, spsm = 0, smsp = 0;
  cd spsp(0, 0);
  for (int m = 0; m <= N; ++m) {
    const double p = std::norm(st.c[m]);
    const double mz = m - s;
    sz += p * mz;
    sz2 += p * mz * mz;
    if (m >= 1) spsm += p * ap[m - 1] * ap[m - 1];
    smsp += p * ap[m] * ap[m];
    if (m + 2 <= N) spsp += std::conj(st.c[m + 2]) * st.c[m] * ap[m] * ap[m + 1];
  }

  SpinMoments out;
  out.sz = sz;
  out.d_sz = sz + s;
  out.sx2 = 0.25 * (spsm + smsp + 2.0 * spsp.real());
  out.sy2 = 0.25 * (spsm + smsp - 2.0 * spsp.real());
  out.s_total_sq = 0.5 * (spsm + smsp) + sz2;
  if (std::abs(sz) < 1e-12 * N)
    throw DegenerateError("moments: <Sz> = 0, phase sensitivity undefined");
  out.dphi = std::sqrt(out.sx2) / std::abs(sz);
  return out;
}

inline double sql_limit(EnsembleSize n) { return 1.0 / std::sqrt(n.n_atoms); }

inline double heisenberg_limit(EnsembleSize n) {
  const double N = n.n_atoms;
  return 1.0 / std::sqrt(N * (N / 2.0 + 1.0));
}

}  // namespace sqz
