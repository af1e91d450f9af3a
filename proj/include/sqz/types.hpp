#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "sqz/errors.hpp"

namespace sqz {

using cd = std::complex<double>;
using DMat = Eigen::MatrixXcd;
using DVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cd>;

// Two state-space representations:
//   symmetric: the maximal-spin sector S = N/2, dimension N+1;
//   full     : the 2^N product space.
enum class Basis { symmetric, full };

inline const char* to_string(Basis b) {
  return b == Basis::symmetric ? "symmetric" : "full";
}

// Default cap on full product-space constructions (density matrices reach
// 4^N entries; 12 atoms = 16 M complex entries).
inline constexpr int kFullSpaceCap = 12;

// Ensemble of N spin-1/2 atoms; collective spin S = N/2.
struct EnsembleSize {
  int n_atoms = 1;

  EnsembleSize() = default;
  explicit EnsembleSize(int n) : n_atoms(n) {
    if (n < 1) throw DomainError("EnsembleSize: N must be >= 1, got " + std::to_string(n));
  }

  double total_spin() const { return 0.5 * n_atoms; }
  int symmetric_dim() const { return n_atoms + 1; }
  std::int64_t full_dim() const { return std::int64_t{1} << n_atoms; }
};

inline int checked_full_dim(EnsembleSize n, int cap = kFullSpaceCap) {
  if (n.n_atoms > cap)
    throw CapacityError("full basis refused: N = " + std::to_string(n.n_atoms) +
                        " exceeds cap = " + std::to_string(cap));
  return static_cast<int>(n.full_dim());
}

// First and second collective-spin moments plus the phase sensitivity
// dphi = sqrt(<Sx^2>)/|<Sz>|.  dphi is +inf when <Sz> is numerically zero.
// d_sz = <Sz> + N/2 measures departure from the fully polarized pole.
struct SpinMoments {
  double sz = 0;
  double d_sz = 0;
  double sx2 = 0;
  double sy2 = 0;
  double s_total_sq = 0;
  double dphi = 0;
};

inline double dphi_of(double sx2, double sz) {
  if (sz == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(sx2) / std::abs(sz);
}

}  // namespace sqz
