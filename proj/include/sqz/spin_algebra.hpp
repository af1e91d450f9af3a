#pragma once
// Collective and single-site spin-1/2 operators over two bases.
//
// Symmetric basis: Dicke states of the maximal sector S = N/2, indexed by
// m in [0, N] with Sz eigenvalue m - N/2 (m = 0 is fully down-polarized).
// With this orientation S+ occupies the subdiagonal (row m+1, column m).
//
// Full basis: product space of dimension 2^N; bit j-1 of the basis index set
// means atom j (1-based) is in |+>.  Index 0 is |- - ... ->.
//
// Drive convention everywhere: tan(theta) = r = weak/strong drive ratio,
// theta in [0, pi/2); collective jump J = sin(theta) S+ + cos(theta) S-.

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "sqz/errors.hpp"
#include "sqz/types.hpp"

namespace sqz {

enum class OpKind { Sp, Sm, Sz, Sx, Sy, S2 };

struct SpinOperator {
  SpMat mat;
  Basis basis = Basis::symmetric;
  EnsembleSize n;

  int dim() const { return static_cast<int>(mat.rows()); }
};

// <S, mz+1 | S+ | S, mz> = sqrt(S(S+1) - mz(mz+1)).
inline double ladder_element(double s, double mz) {
  if (std::abs(mz) > s)
    throw DomainError("ladder_element: |m_z| > S");
  const double steps = s - mz;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw DomainError("ladder_element: S - m_z not an integer");
  const double v = s * (s + 1.0) - mz * (mz + 1.0);
  return v <= 0.0 ? 0.0 : std::sqrt(v);
}

namespace detail {

using Trip = Eigen::Triplet<cd>;

inline SpMat from_triplets(int dim, const std::vector<Trip>& ts) {
  SpMat m(dim, dim);
  m.setFromTriplets(ts.begin(), ts.end());
  m.makeCompressed();
  return m;
}

inline SpMat raising_symmetric(EnsembleSize n) {
  const double s = n.total_spin();
  std::vector<Trip> ts;
  ts.reserve(n.n_atoms);
  for (int m = 0; m < n.n_atoms; ++m)
    ts.emplace_back(m + 1, m, cd(ladder_element(s, m - s), 0.0));
  return from_triplets(n.symmetric_dim(), ts);
}

inline SpMat raising_full(EnsembleSize n, int cap) {
  const int dim = checked_full_dim(n, cap);
  std::vector<Trip> ts;
  ts.reserve(static_cast<std::size_t>(dim) * n.n_atoms / 2);
  for (int j = 0; j < n.n_atoms; ++j) {
    const int bit = 1 << j;
    for (int b = 0; b < dim; ++b)
      if (!(b & bit)) ts.emplace_back(b | bit, b, cd(1.0, 0.0));
  }
  return from_triplets(dim, ts);
}

inline SpMat sz_diag(EnsembleSize n, Basis basis, int cap) {
  std::vector<Trip> ts;
  if (basis == Basis::symmetric) {
    const double s = n.total_spin();
    for (int m = 0; m <= n.n_atoms; ++m) ts.emplace_back(m, m, cd(m - s, 0.0));
    return from_triplets(n.symmetric_dim(), ts);
  }
  const int dim = checked_full_dim(n, cap);
  const double s = n.total_spin();
  for (int b = 0; b < dim; ++b)
    ts.emplace_back(b, b, cd(std::popcount(static_cast<unsigned>(b)) - s, 0.0));
  return from_triplets(dim, ts);
}

}  // namespace detail

inline SpinOperator build_collective(OpKind kind, EnsembleSize n, Basis basis,
                                     int cap = kFullSpaceCap) {
  SpinOperator op;
  op.basis = basis;
  op.n = n;
  const auto raising = [&] {
    return basis == Basis::symmetric ? detail::raising_symmetric(n)
                                     : detail::raising_full(n, cap);
  };
  switch (kind) {
    case OpKind::Sp:
      op.mat = raising();
      break;
    case OpKind::Sm:
      op.mat = SpMat(raising().adjoint());
      break;
    case OpKind::Sz:
      op.mat = detail::sz_diag(n, basis, cap);
      break;
    case OpKind::Sx: {
      SpMat sp = raising();
      op.mat = cd(0.5, 0.0) * (sp + SpMat(sp.adjoint()));
      break;
    }
    case OpKind::Sy: {
      SpMat sp = raising();
      op.mat = cd(0.0, -0.5) * (sp - SpMat(sp.adjoint()));
      break;
    }
    case OpKind::S2: {
      if (basis == Basis::symmetric) {
        const double s = n.total_spin();
        std::vector<detail::Trip> ts;
        for (int m = 0; m <= n.n_atoms; ++m)
          ts.emplace_back(m, m, cd(s * (s + 1.0), 0.0));
        op.mat = detail::from_triplets(n.symmetric_dim(), ts);
      } else {
        // S^2 = S+ S- + Sz^2 - Sz
        SpMat sp = raising();
        SpMat sz = detail::sz_diag(n, basis, cap);
        op.mat = SpMat(sp * SpMat(sp.adjoint())) + SpMat(sz * sz) - sz;
      }
      break;
    }
  }
  op.mat.makeCompressed();
  return op;
}

// J = sin(theta) S+ + cos(theta) S-.
inline SpinOperator jump_operator(double theta, EnsembleSize n, Basis basis,
                                  int cap = kFullSpaceCap) {
  if (!(theta >= 0.0 && theta < std::acos(-1.0) / 2))
    throw DomainError("jump_operator: theta must lie in [0, pi/2)");
  SpinOperator op;
  op.basis = basis;
  op.n = n;
  SpMat sp = basis == Basis::symmetric ? detail::raising_symmetric(n)
                                       : detail::raising_full(n, cap);
  op.mat = cd(std::sin(theta), 0.0) * sp + cd(std::cos(theta), 0.0) * SpMat(sp.adjoint());
  op.mat.makeCompressed();
  return op;
}

// The three decay channels of atom j (1-based), full basis, in the order
// { L_sigma+, L_sigma-, L_pi }:
//   L_sigma+ = sin(theta) |-><-|_j   (projector, weak leg)
//   L_sigma- = cos(theta) |+><+|_j   (projector, strong leg)
//   L_pi     = sin(theta) sigma+_j + cos(theta) sigma-_j   (spin flip)
inline std::vector<SpinOperator> single_atom_jumps(double theta, int atom_index,
                                                   EnsembleSize n,
                                                   int cap = kFullSpaceCap) {
  if (atom_index < 1 || atom_index > n.n_atoms)
    throw DomainError("single_atom_jumps: atom index " + std::to_string(atom_index) +
                      " outside 1.." + std::to_string(n.n_atoms));
  const int dim = checked_full_dim(n, cap);
  const int bit = 1 << (atom_index - 1);
  const double sn = std::sin(theta), cs = std::cos(theta);

  std::vector<detail::Trip> below, above, flip;
  for (int b = 0; b < dim; ++b) {
    if (b & bit) {
      above.emplace_back(b, b, cd(cs, 0.0));
      flip.emplace_back(b ^ bit, b, cd(cs, 0.0));  // sigma- part
    } else {
      below.emplace_back(b, b, cd(sn, 0.0));
      flip.emplace_back(b ^ bit, b, cd(sn, 0.0));  // sigma+ part
    }
  }
  std::vector<SpinOperator> out(3);
  for (auto* o : {&out[0], &out[1], &out[2]}) {
    o->basis = Basis::full;
    o->n = n;
  }
  out[0].mat = detail::from_triplets(dim, below);
  out[1].mat = detail::from_triplets(dim, above);
  out[2].mat = detail::from_triplets(dim, flip);
  return out;
}

// Isometry from the symmetric sector into the full space:
// column m is the normalized Dicke state, E(b, m) = C(N, m)^{-1/2} for
// popcount(b) = m.  E†E = identity.
inline SpMat dicke_embedding(EnsembleSize n, int cap = kFullSpaceCap) {
  const int dim = checked_full_dim(n, cap);
  std::vector<double> binom(n.n_atoms + 1, 1.0);
  for (int m = 1; m <= n.n_atoms; ++m)
    binom[m] = binom[m - 1] * (n.n_atoms - m + 1) / m;
  std::vector<detail::Trip> ts;
  ts.reserve(dim);
  for (int b = 0; b < dim; ++b) {
    const int m = std::popcount(static_cast<unsigned>(b));
    ts.emplace_back(b, m, cd(1.0 / std::sqrt(binom[m]), 0.0));
  }
  SpMat e(dim, n.symmetric_dim());
  e.setFromTriplets(ts.begin(), ts.end());
  e.makeCompressed();
  return e;
}

}  // namespace sqz
