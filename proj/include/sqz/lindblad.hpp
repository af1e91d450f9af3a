#pragma once
// Master-equation engine: time evolution and steady-state extraction for the
// collective cavity channel and the single-atom Raman channels.
//
// Dissipator normalization is the doubled form, per channel:
//   d rho/dt = -gamma ( {L†L, rho} - 2 L rho L† ),
// which is twice the textbook Lindblad dissipator.  Steady states are
// unaffected; transient rates are twice the conventional ones, and every
// rate reported by this module is in these units.
//
// The right-hand side is applied matrix-free.  For the cavity channel,
// A = J†J rho and the anticommutator becomes A + A† (valid because rho stays
// Hermitian through every Runge-Kutta stage).  The three single-atom
// channels per atom reduce to per-atom flip sandwiches plus one elementwise
// damping mask:
//   -2 gamma_spont * W(a,b) * rho(a,b),
//   W(a,b) = sin^2(t) N + cos^2(t) [pc(a) + pc(b)] - pc(a AND b),
// where pc is the set-bit count; W collects the flip anticommutators and
// the full projector-channel contribution.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sqz/csr.hpp"
#include "sqz/errors.hpp"
#include "sqz/integrator.hpp"
#include "sqz/spin_algebra.hpp"
#include "sqz/types.hpp"

namespace sqz {

struct DensityMatrix {
  DMat rho;
  Basis basis = Basis::symmetric;
  EnsembleSize n;
};

// Sparse contraction operators for collective moments.
struct MomentOps {
  int n_atoms = 0;
  Eigen::VectorXd sz;   // diagonal of Sz
  Eigen::VectorXd sz2;  // diagonal of Sz^2
  detail::Csr spsm;     // S+ S-
  detail::Csr spsp;     // S+ S+
};

struct ChannelSet {
  EnsembleSize n;
  Basis basis = Basis::symmetric;
  double theta = 0;
  double gamma_cav = 0;
  double gamma_spont = 0;

  detail::Csr j, jh;                 // collective jump and its adjoint
  std::vector<detail::Csr> flips;    // per-atom flip channel (full basis)
  Eigen::VectorXd wpop;              // cos^2(theta) * popcount(index)
  double wbase = 0;                  // sin^2(theta) * N
  MomentOps mops;
};

inline MomentOps make_moment_ops(EnsembleSize n, Basis basis, int cap) {
  MomentOps m;
  m.n_atoms = n.n_atoms;
  const SpMat sp = build_collective(OpKind::Sp, n, basis, cap).mat;
  const SpMat szs = build_collective(OpKind::Sz, n, basis, cap).mat;
  const int dim = static_cast<int>(sp.rows());
  m.sz.resize(dim);
  for (int i = 0; i < dim; ++i) m.sz[i] = szs.coeff(i, i).real();
  m.sz2 = m.sz.cwiseProduct(m.sz);
  m.spsm = detail::csr_from_sparse(SpMat(sp * SpMat(sp.adjoint())));
  m.spsp = detail::csr_from_sparse(SpMat(sp * sp));
  return m;
}

inline ChannelSet make_channels(EnsembleSize n, Basis basis, double theta,
                                double gamma_cav, double gamma_spont,
                                int cap = kFullSpaceCap) {
  if (gamma_cav < 0 || gamma_spont < 0)
    throw DomainError("make_channels: rates must be non-negative");
  if (basis == Basis::symmetric && gamma_spont > 0)
    throw BasisMismatchError(
        "make_channels: single-atom channels require the full basis");
  ChannelSet ch;
  ch.n = n;
  ch.basis = basis;
  ch.theta = theta;
  ch.gamma_cav = gamma_cav;
  ch.gamma_spont = gamma_spont;
  const SpMat j = jump_operator(theta, n, basis, cap).mat;
  ch.j = detail::csr_from_sparse(j);
  ch.jh = detail::csr_from_sparse(SpMat(j.adjoint()));
  if (basis == Basis::full && gamma_spont > 0) {
    const int dim = checked_full_dim(n, cap);
    const double c2 = std::cos(theta) * std::cos(theta);
    ch.wbase = std::sin(theta) * std::sin(theta) * n.n_atoms;
    ch.wpop.resize(dim);
    for (int b = 0; b < dim; ++b)
      ch.wpop[b] = c2 * std::popcount(static_cast<unsigned>(b));
    ch.flips.reserve(n.n_atoms);
    for (int a = 1; a <= n.n_atoms; ++a)
      ch.flips.push_back(
          detail::csr_from_sparse(single_atom_jumps(theta, a, n, cap)[2].mat));
  }
  ch.mops = make_moment_ops(n, basis, cap);
  return ch;
}

namespace detail {

// out = -g (A + A†), tiled for the transposed access.
inline void anticomm_assign(const DMat& a, double g, DMat& out) {
  const int dim = static_cast<int>(a.rows());
  constexpr int B = 32;
  for (int jb = 0; jb < dim; jb += B) {
    const int je = std::min(jb + B, dim);
    for (int ib = 0; ib < dim; ib += B) {
      const int ie = std::min(ib + B, dim);
      for (int j = jb; j < je; ++j)
        for (int i = ib; i < ie; ++i)
          out(i, j) = -g * (a(i, j) + std::conj(a(j, i)));
    }
  }
}

struct Workspace {
  DMat u, a, v;
  void ensure(int dim) {
    if (u.rows() != dim) {
      u.resize(dim, dim);
      a.resize(dim, dim);
      v.resize(dim, dim);
    }
  }
};

inline void rhs_cavity_inplace(const ChannelSet& ch, const DMat& y, DMat& dy,
                               Workspace& ws) {
  ws.ensure(static_cast<int>(y.rows()));
  spmm(ch.j, y, ws.u);    // U = J y
  spmm(ch.jh, ws.u, ws.a);  // A = J†J y
  anticomm_assign(ws.a, ch.gamma_cav, dy);
  adjr_acc(ch.j, cd(2.0 * ch.gamma_cav, 0.0), ws.u, dy);
}

inline void rhs_full_inplace(const ChannelSet& ch, const DMat& y, DMat& dy,
                             Workspace& ws) {
  rhs_cavity_inplace(ch, y, dy, ws);
  if (ch.gamma_spont <= 0) return;
  const cd g2(2.0 * ch.gamma_spont, 0.0);
  for (const auto& f : ch.flips) {
    spmm(f, y, ws.v);
    adjr_acc(f, g2, ws.v, dy);
  }
  const int dim = static_cast<int>(y.rows());
  const double gs2 = 2.0 * ch.gamma_spont;
  const double* wpop = ch.wpop.data();
  for (int b = 0; b < dim; ++b) {
    const double wb = ch.wbase + wpop[b];
    const cd* yc = y.data() + static_cast<std::ptrdiff_t>(b) * dim;
    cd* dc = dy.data() + static_cast<std::ptrdiff_t>(b) * dim;
    for (int a = 0; a < dim; ++a) {
      const double w =
          wb + wpop[a] - std::popcount(static_cast<unsigned>(a & b));
      dc[a] -= gs2 * w * yc[a];
    }
  }
}

struct LindbladRhs {
  const ChannelSet* ch;
  Workspace* ws;
  void operator()(const DMat& y, DMat& dy) const {
    if (ch->basis == Basis::full && ch->gamma_spont > 0)
      rhs_full_inplace(*ch, y, dy, *ws);
    else
      rhs_cavity_inplace(*ch, y, dy, *ws);
  }
};

}  // namespace detail

// Right-hand side of the cavity-only master equation (either basis).
inline DMat rhs_cavity(const ChannelSet& ch, const DMat& rho) {
  if (rho.rows() != static_cast<Eigen::Index>(ch.mops.sz.size()))
    throw BasisMismatchError("rhs_cavity: state dimension does not match channels");
  detail::Workspace ws;
  DMat dy(rho.rows(), rho.cols());
  detail::rhs_cavity_inplace(ch, rho, dy, ws);
  return dy;
}

// Full right-hand side: cavity channel plus the three Raman channels per atom.
inline DMat rhs_full(const ChannelSet& ch, const DMat& rho) {
  if (ch.basis != Basis::full)
    throw BasisMismatchError("rhs_full: requires a full-basis channel set");
  if (rho.rows() != static_cast<Eigen::Index>(ch.mops.sz.size()))
    throw BasisMismatchError("rhs_full: state dimension does not match channels");
  detail::Workspace ws;
  DMat dy(rho.rows(), rho.cols());
  detail::rhs_full_inplace(ch, rho, dy, ws);
  return dy;
}

// Collective moments of a density matrix (normalized by its trace).
inline SpinMoments moments_of(const DMat& rho, const MomentOps& m) {
  const int dim = static_cast<int>(rho.rows());
  double tr = 0, sz = 0, sz2 = 0;
  for (int i = 0; i < dim; ++i) {
    const double p = rho(i, i).real();
    tr += p;
    sz += m.sz[i] * p;
    sz2 += m.sz2[i] * p;
  }
  const double spsm = detail::trace_product(m.spsm, rho).real();
  const cd spsp = detail::trace_product(m.spsp, rho);
  SpinMoments out;
  sz /= tr;
  sz2 /= tr;
  const double spsm_n = spsm / tr;
  const double spsp_re = spsp.real() / tr;
  const double smsp_n = spsm_n - 2.0 * sz;  // <S-S+> = <S+S-> - 2<Sz>
  out.sz = sz;
  out.d_sz = sz + 0.5 * m.n_atoms;
  out.sx2 = 0.25 * (spsm_n + smsp_n + 2.0 * spsp_re);
  out.sy2 = 0.25 * (spsm_n + smsp_n - 2.0 * spsp_re);
  out.s_total_sq = spsm_n - sz + sz2;
  out.dphi = dphi_of(out.sx2, sz);
  return out;
}

struct StateHealth {
  double trace_err = 0;
  double herm_err = 0;
  double min_diag = 0;
  double min_eig = std::numeric_limits<double>::quiet_NaN();
};

inline StateHealth validate_state(const DMat& rho, bool full_spectrum = false) {
  StateHealth h;
  h.trace_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  h.herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  h.min_diag = rho.diagonal().real().minCoeff();
  if (full_spectrum) {
    Eigen::SelfAdjointEigenSolver<DMat> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
    h.min_eig = es.eigenvalues().minCoeff();
  }
  return h;
}

struct EvolveOptions {
  double t_max = 0;           // 0 -> 50 / (gamma_cav N max(cos 2t, 1/N))
  double sample_dt = 0;       // 0 -> t_max / 96
  double conv_tol_rate = -1;  // < 0 -> 1e-9 * gamma_cav * N
  IntegratorOptions integ{};
  bool final_eigencheck = true;
  double positivity_floor = -1e-6;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpinMoments> moments;
  std::vector<double> purity;
  std::vector<double> trace_err;
  bool converged = false;
  SpinMoments steady;
  double max_trace_err = 0;
  double max_herm_err = 0;
  double s2_drift = 0;
  double final_residual = 0;  // ||d rho/dt||_F at the last sample
  double min_diag = 0;
  double final_min_eig = std::numeric_limits<double>::quiet_NaN();
  IntegratorStats stats;
  DMat rho_final;
  Basis basis = Basis::symmetric;
  double t_max_used = 0, sample_dt_used = 0, conv_tol_used = 0;
};

inline double default_t_max(const ChannelSet& ch) {
  const int N = ch.n.n_atoms;
  const double span = std::max(std::cos(2.0 * ch.theta), 1.0 / N);
  double rate = ch.gamma_cav * N * span;
  if (rate <= 0) rate = ch.gamma_spont > 0 ? ch.gamma_spont : 1.0;
  return 50.0 / rate;
}

// Integrate d rho/dt with adaptive error control, sampling moments on a fixed
// grid.  Convergence: ||d rho/dt||_F below conv_tol_rate at two consecutive
// samples.  rho is re-symmetrized at every sample; trace is normalized once
// at entry.  Non-convergence by t_max is flagged, not fatal; step underflow
// and positivity violations beyond the floor throw IntegrationError.
inline Trajectory evolve(const ChannelSet& ch, DMat rho0, EvolveOptions opt = {}) {
  const int dim = static_cast<int>(ch.mops.sz.size());
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw BasisMismatchError("evolve: state dimension does not match channels");

  detail::hermitize(rho0);
  const double tr0 = rho0.trace().real();
  if (std::abs(tr0) < 1e-300) throw DomainError("evolve: initial state has zero trace");
  rho0 /= tr0;

  const double t_max = opt.t_max > 0 ? opt.t_max : default_t_max(ch);
  const double sample_dt = opt.sample_dt > 0 ? opt.sample_dt : t_max / 96.0;
  const double ctol = opt.conv_tol_rate >= 0
                          ? opt.conv_tol_rate
                          : 1e-9 * std::max(ch.gamma_cav, ch.gamma_spont) * ch.n.n_atoms;

  detail::Workspace ws;
  detail::LindbladRhs rhs{&ch, &ws};
  IntegratorOptions iopt = opt.integ;
  iopt.hermitize_steps = true;  // the folded RHS is only valid on Hermitian states
  Dp54<detail::LindbladRhs> step(rhs, dim, dim, iopt);

  Trajectory tr;
  tr.basis = ch.basis;
  tr.t_max_used = t_max;
  tr.sample_dt_used = sample_dt;
  tr.conv_tol_used = ctol;

  double s2_ref = 0;
  const auto record = [&](double t, const DMat& rho) {
    const SpinMoments m = moments_of(rho, ch.mops);
    const double trace = rho.trace().real();
    tr.times.push_back(t);
    tr.moments.push_back(m);
    tr.purity.push_back(rho.squaredNorm());
    tr.trace_err.push_back(std::abs(trace - 1.0));
    tr.max_trace_err = std::max(tr.max_trace_err, tr.trace_err.back());
    if (tr.times.size() == 1)
      s2_ref = m.s_total_sq;
    else
      tr.s2_drift = std::max(tr.s2_drift, std::abs(m.s_total_sq - s2_ref));
    const double dmin = rho.diagonal().real().minCoeff();
    tr.min_diag = std::min(tr.min_diag, dmin);
    if (dmin < opt.positivity_floor)
      throw IntegrationError("positivity violated: min diagonal " +
                             std::to_string(dmin) + " at t = " + std::to_string(t));
  };

  double t = 0.0;
  record(0.0, rho0);
  int quiet_streak = 0;
  for (int k = 1; t < t_max; ++k) {
    const double t_next = std::min(k * sample_dt, t_max);
    step.integrate_to(rho0, t, t_next);
    tr.final_residual = step.derivative().norm();
    const double asym = detail::hermitize(rho0);
    tr.max_herm_err = std::max(tr.max_herm_err, asym);
    if (asym > 0.5 * opt.integ.atol) step.restart();
    record(t, rho0);
    if (tr.final_residual < ctol) {
      if (++quiet_streak >= 2) {
        tr.converged = true;
        break;
      }
    } else {
      quiet_streak = 0;
    }
  }

  tr.stats = step.stats();
  tr.steady = tr.moments.back();
  if (opt.final_eigencheck) {
    Eigen::SelfAdjointEigenSolver<DMat> es(rho0, Eigen::EigenvaluesOnly);
    tr.final_min_eig = es.eigenvalues().minCoeff();
    if (tr.final_min_eig < opt.positivity_floor)
      throw IntegrationError("positivity violated in final state: min eigenvalue " +
                             std::to_string(tr.final_min_eig));
  }
  tr.rho_final = std::move(rho0);
  return tr;
}

inline Trajectory evolve(const ChannelSet& ch, const DensityMatrix& rho0,
                         double t_max, double sample_dt, double tol) {
  if (rho0.basis != ch.basis)
    throw BasisMismatchError("evolve: state and channels disagree on basis");
  EvolveOptions opt;
  opt.t_max = t_max;
  opt.sample_dt = sample_dt;
  opt.conv_tol_rate = tol;
  return evolve(ch, rho0.rho, opt);
}

struct NullspaceResult {
  DensityMatrix state;
  int kernel_dim = 0;
  Eigen::VectorXd tail_singulars;  // smallest few singular values
};

// Brute-force steady state: build the dense superoperator over vec(rho)
// (column-major), take the singular vector of the smallest singular value,
// Hermitize and trace-normalize.  Kernel dimension is the count of singular
// values <= 1e-10 * sigma_max; it exceeds one when gamma_spont = 0 (each
// spin sector contributes its own stationary state) and the returned state
// is then just one representative of the kernel.
inline NullspaceResult steady_state_nullspace(const ChannelSet& ch,
                                              int cap = kFullSpaceCap) {
  const int d = static_cast<int>(ch.mops.sz.size());
  if (static_cast<std::int64_t>(d) * d > 4096)
    throw CapacityError("steady_state_nullspace: superoperator dimension " +
                        std::to_string(static_cast<std::int64_t>(d) * d) +
                        " exceeds 4096");
  const int D = d * d;

  std::vector<std::pair<double, DMat>> channels;
  channels.emplace_back(ch.gamma_cav,
                        DMat(jump_operator(ch.theta, ch.n, ch.basis, cap).mat));
  if (ch.gamma_spont > 0) {
    for (int a = 1; a <= ch.n.n_atoms; ++a)
      for (const auto& op : single_atom_jumps(ch.theta, a, ch.n, cap))
        channels.emplace_back(ch.gamma_spont, DMat(op.mat));
  }

  DMat m = DMat::Zero(D, D);
  for (const auto& [g, l] : channels) {
    if (g <= 0) continue;
    const DMat k = l.adjoint() * l;
    for (int jc = 0; jc < d; ++jc)
      for (int jr = 0; jr < d; ++jr) {
        // Sandwich 2 L rho L†: block (jr, jc) scaled by conj(L(jr, jc)).
        const cd w = 2.0 * g * std::conj(l(jr, jc));
        if (w != cd(0, 0))
          for (int ic = 0; ic < d; ++ic)
            for (int ir = 0; ir < d; ++ir)
              m(ir + static_cast<std::ptrdiff_t>(d) * jr,
                ic + static_cast<std::ptrdiff_t>(d) * jc) += w * l(ir, ic);
      }
    for (int j = 0; j < d; ++j)
      for (int ic = 0; ic < d; ++ic)
        for (int ir = 0; ir < d; ++ir) {
          // -{K, rho}: K rho is block-diagonal in the column index,
          // the rho K half couples column blocks below.
          m(ir + static_cast<std::ptrdiff_t>(d) * j,
            ic + static_cast<std::ptrdiff_t>(d) * j) -= g * k(ir, ic);
        }
    for (int jr = 0; jr < d; ++jr)
      for (int jc = 0; jc < d; ++jc) {
        const cd w = k(jc, jr);
        if (w != cd(0, 0))
          for (int i = 0; i < d; ++i)
            m(i + static_cast<std::ptrdiff_t>(d) * jr,
              i + static_cast<std::ptrdiff_t>(d) * jc) -= g * w;
      }
  }

  Eigen::VectorXd sv;
  DMat v;
  if (D <= 300) {
    Eigen::JacobiSVD<DMat> svd(m, Eigen::ComputeFullV);
    sv = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::BDCSVD<DMat> svd(m, Eigen::ComputeFullV);
    sv = svd.singularValues();
    v = svd.matrixV();
  }
  NullspaceResult out;
  const double smax = sv(0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-10 * std::max(smax, 1.0)) ++out.kernel_dim;
  const int tail = std::min<int>(5, static_cast<int>(sv.size()));
  out.tail_singulars = sv.tail(tail);

  DVec kv = v.col(D - 1);
  DMat rho = Eigen::Map<DMat>(kv.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double trr = rho.trace().real();
  if (std::abs(trr) < 1e-12)
    throw DomainError(
        "steady_state_nullspace: kernel vector has vanishing trace (kernel "
        "dimension " +
        std::to_string(out.kernel_dim) + ")");
  rho /= trr;
  out.state = DensityMatrix{std::move(rho), ch.basis, ch.n};
  return out;
}

enum class RandomKind { haar_pure, product_random };

namespace detail {

// Deterministic standard-normal pairs from raw 64-bit draws (Box-Muller on
// top of mt19937_64; independent of any stdlib distribution).
class Gauss {
 public:
  explicit Gauss(std::uint64_t seed) : eng_(seed) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::acos(-1.0) * u2;
    cached_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0;
  bool have_ = false;
};

}  // namespace detail

// Deterministic random initial states in the full basis.
inline DensityMatrix random_state(EnsembleSize n, std::uint64_t seed,
                                  RandomKind kind = RandomKind::haar_pure,
                                  int cap = kFullSpaceCap) {
  const int dim = checked_full_dim(n, cap);
  detail::Gauss g(seed);
  DVec psi(dim);
  if (kind == RandomKind::haar_pure) {
    for (int i = 0; i < dim; ++i) psi[i] = cd(g(), g());
  } else {
    std::vector<cd> up(n.n_atoms), down(n.n_atoms);
    for (int j = 0; j < n.n_atoms; ++j) {
      const double z = 2.0 * g.uniform() - 1.0;
      const double phi = 2.0 * std::acos(-1.0) * g.uniform();
      down[j] = cd(std::sqrt(0.5 * (1.0 + z)), 0.0);
      up[j] = std::polar(std::sqrt(0.5 * (1.0 - z)), phi);
    }
    for (int b = 0; b < dim; ++b) {
      cd amp(1.0, 0.0);
      for (int j = 0; j < n.n_atoms; ++j) amp *= (b >> j) & 1 ? up[j] : down[j];
      psi[b] = amp;
    }
  }
  psi /= psi.norm();
  return DensityMatrix{psi * psi.adjoint(), Basis::full, n};
}

// Projector onto the fully down-polarized state (index 0 in either basis).
inline DensityMatrix polarized_state(EnsembleSize n, Basis basis,
                                     int cap = kFullSpaceCap) {
  const int dim =
      basis == Basis::symmetric ? n.symmetric_dim() : checked_full_dim(n, cap);
  DMat rho = DMat::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return DensityMatrix{std::move(rho), basis, n};
}

}  // namespace sqz
