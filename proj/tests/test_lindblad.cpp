#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "sqz/dark_state.hpp"
#include "sqz/lindblad.hpp"

using namespace sqz;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Deterministic dense Hermitian test state with unit trace.
DMat test_density(int dim, std::uint64_t seed) {
  sqz::detail::Gauss g(seed);
  DMat a(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = cd(g(), g());
  DMat rho = a * a.adjoint();  // positive semidefinite
  rho /= rho.trace().real();
  return rho;
}

double max_abs(const DMat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("full RHS matches the dense channel-by-channel oracle") {
  const double gc = 0.7, gs = 0.3;
  for (int n : {2, 3, 4}) {
    for (double theta : {0.0, 0.3, std::atan(0.5)}) {
      const auto ch = make_channels(EnsembleSize(n), Basis::full, theta, gc, gs);
      const DMat rho = test_density(1 << n, 91 + n);
      const DMat got = rhs_full(ch, rho);
      const DMat want = oracle::naive_rhs(rho, n, theta, gc, gs);
      INFO("N = " << n << ", theta = " << theta);
      CHECK(max_abs(got - want) < 1e-13);
    }
  }
}

TEST_CASE("cavity-only RHS agrees with the oracle in the full basis") {
  const auto ch = make_channels(EnsembleSize(3), Basis::full, 0.4, 1.3, 0.0);
  const DMat rho = test_density(8, 5);
  CHECK(max_abs(rhs_full(ch, rho) - oracle::naive_rhs(rho, 3, 0.4, 1.3, 0.0)) <
        1e-13);
  CHECK(max_abs(rhs_cavity(ch, rho) - oracle::naive_rhs(rho, 3, 0.4, 1.3, 0.0)) <
        1e-13);
}

TEST_CASE("symmetric-sector RHS against a dense dissipator") {
  const int n = 7;
  const double theta = std::atan(0.35), gc = 0.8;
  const auto ch = make_channels(EnsembleSize(n), Basis::symmetric, theta, gc, 0.0);
  const DMat rho = test_density(n + 1, 17);
  const DMat j = oracle::jump_dense_symmetric(n, theta);
  const DMat k = j.adjoint() * j;
  const DMat want = -gc * (k * rho + rho * k - 2.0 * j * rho * j.adjoint());
  CHECK(max_abs(rhs_cavity(ch, rho) - want) < 1e-13);
}

TEST_CASE("dark-state projector is stationary") {
  const int n = 6;
  const double r = 0.4;
  const auto st = dark_state(EnsembleSize(n), r);
  const DMat rho = st.c * st.c.adjoint();

  SECTION("symmetric basis") {
    const auto ch =
        make_channels(EnsembleSize(n), Basis::symmetric, std::atan(r), 1.0, 0.0);
    CHECK(max_abs(rhs_cavity(ch, rho)) < 1e-12);
  }
  SECTION("embedded in the full basis, cavity channel only") {
    const SpMat e = dicke_embedding(EnsembleSize(n));
    const DVec psi = e * st.c;
    const DMat rho_full = psi * psi.adjoint();
    const auto ch =
        make_channels(EnsembleSize(n), Basis::full, std::atan(r), 1.0, 0.0);
    CHECK(max_abs(rhs_full(ch, rho_full)) < 1e-12);
  }
}

TEST_CASE("superradiant initial rate from the fully inverted state") {
  // theta = 0, N = 2, rho = |++><++|: d<Sz>/dt = -2 gamma <S+S-> = -4 gamma
  // in the doubled normalization.
  const double gamma = 0.9;
  const auto ch = make_channels(EnsembleSize(2), Basis::symmetric, 0.0, gamma, 0.0);
  DMat rho = DMat::Zero(3, 3);
  rho(2, 2) = 1.0;
  const DMat dy = rhs_cavity(ch, rho);
  double dsz = 0;
  for (int i = 0; i < 3; ++i) dsz += ch.mops.sz[i] * dy(i, i).real();
  CHECK_THAT(dsz, WithinRel(-4.0 * gamma, 1e-12));
}

TEST_CASE("moments from a density matrix match the amplitude contractions") {
  const auto st = dark_state(EnsembleSize(8), 0.6);
  const auto direct = moments(st);
  const auto ch =
      make_channels(EnsembleSize(8), Basis::symmetric, std::atan(0.6), 1.0, 0.0);
  const auto viarho = moments_of(st.c * st.c.adjoint(), ch.mops);
  CHECK_THAT(viarho.sz, WithinAbs(direct.sz, 1e-12));
  CHECK_THAT(viarho.d_sz, WithinAbs(direct.d_sz, 1e-12));
  CHECK_THAT(viarho.sx2, WithinAbs(direct.sx2, 1e-12));
  CHECK_THAT(viarho.sy2, WithinAbs(direct.sy2, 1e-12));
  CHECK_THAT(viarho.s_total_sq, WithinAbs(direct.s_total_sq, 1e-10));
  CHECK_THAT(viarho.dphi, WithinRel(direct.dphi, 1e-10));
}

TEST_CASE("single-atom decay rates, N = 1, theta = 0") {
  // sigma- at gamma_cav plus sigma- at gamma_spont: the excited population
  // decays at 2(gamma_cav + gamma_spont), coherence at half the population
  // rate plus the projector-channel dephasing.
  const double gc = 0.25, gs = 0.45;
  const auto ch = make_channels(EnsembleSize(1), Basis::full, 0.0, gc, gs);
  DMat rho(2, 2);
  rho << cd(0.3, 0.0), cd(0.2, 0.1), cd(0.2, -0.1), cd(0.7, 0.0);
  const DMat dy = rhs_full(ch, rho);
  const double g = gc + gs;
  CHECK_THAT(dy(1, 1).real(), WithinRel(-2.0 * g * 0.7, 1e-12));
  CHECK_THAT(dy(0, 0).real(), WithinRel(+2.0 * g * 0.7, 1e-12));
  // coherence: -(gamma_cav + gamma_spont) from the flips, -gamma_spont
  // cos^2(0) from the |+><+| projector channel.
  const cd expect = -(g + gs) * rho(0, 1);
  CHECK_THAT(std::abs(dy(0, 1) - expect), WithinAbs(0.0, 1e-14));
}

TEST_CASE("integrator reproduces exponential decay") {
  struct Decay {
    void operator()(const DMat& y, DMat& dy) const { dy = -3.0 * y; }
  };
  DMat y(1, 1);
  y(0, 0) = 1.0;
  double t = 0;
  Dp54<Decay> step(Decay{}, 1, 1);
  step.integrate_to(y, t, 2.0);
  CHECK_THAT(t, WithinAbs(2.0, 1e-15));
  CHECK_THAT(y(0, 0).real(), WithinRel(std::exp(-6.0), 1e-7));
  CHECK(step.stats().accepted > 0);
}

TEST_CASE("integrator error control tightens with rtol") {
  struct Osc {
    void operator()(const DMat& y, DMat& dy) const {
      dy(0, 0) = y(1, 0);
      dy(1, 0) = -y(0, 0);
    }
  };
  const auto run = [](double rtol) {
    IntegratorOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-14;
    DMat y(2, 1);
    y(0, 0) = 1.0;
    y(1, 0) = 0.0;
    double t = 0;
    Dp54<Osc> step(Osc{}, 2, 1, opt);
    step.integrate_to(y, t, 10.0);
    return std::abs(y(0, 0) - cd(std::cos(10.0), 0));
  };
  const double coarse = run(1e-5), fine = run(1e-9);
  CHECK(fine < coarse);
  CHECK(fine < 1e-7);
}

TEST_CASE("relaxation into the dark state, symmetric sector") {
  const int n = 6;
  const double r = 0.4;
  const auto ch =
      make_channels(EnsembleSize(n), Basis::symmetric, std::atan(r), 1.0, 0.0);
  EvolveOptions opt;
  // tight stepping keeps the residual noise floor below the convergence
  // tolerance 1e-9 gamma N
  opt.integ.rtol = 1e-10;
  opt.integ.atol = 1e-12;
  auto tr = evolve(ch, polarized_state(EnsembleSize(n), Basis::symmetric).rho, opt);

  CHECK(tr.converged);
  CHECK(tr.max_trace_err < 1e-10);
  CHECK(tr.max_herm_err < 1e-10);
  // S^2 is conserved by the collective channel.
  const double s = 0.5 * n;
  CHECK(tr.s2_drift < 1e-8);
  CHECK_THAT(tr.moments.front().s_total_sq, WithinRel(s * (s + 1.0), 1e-12));

  const auto st = dark_state(EnsembleSize(n), r);
  const auto want = moments(st);
  CHECK_THAT(tr.steady.sz, WithinAbs(want.sz, 1e-7));
  CHECK_THAT(tr.steady.sx2, WithinAbs(want.sx2, 1e-7));
  CHECK_THAT(tr.steady.dphi, WithinRel(want.dphi, 1e-6));
  const double fid = (st.c.adjoint() * tr.rho_final * st.c)(0).real();
  CHECK(fid > 1.0 - 1e-8);

  // sample grid: uniform spacing, strictly increasing
  REQUIRE(tr.times.size() >= 3);
  CHECK_THAT(tr.times[1] - tr.times[0], WithinRel(tr.sample_dt_used, 1e-12));
  for (std::size_t i = 1; i < tr.times.size(); ++i)
    CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("evolve matches the nullspace steady state with single-atom decay") {
  const auto ch =
      make_channels(EnsembleSize(2), Basis::full, std::atan(0.2), 0.5, 0.1);
  const auto ns = steady_state_nullspace(ch);
  CHECK(ns.kernel_dim == 1);

  EvolveOptions opt;
  opt.t_max = 160.0;
  opt.integ.rtol = 1e-10;
  opt.integ.atol = 1e-12;
  auto tr = evolve(ch, random_state(EnsembleSize(2), 3).rho, opt);
  CHECK(tr.converged);
  CHECK(max_abs(tr.rho_final - ns.state.rho) < 1e-8);
}

TEST_CASE("cavity-only kernel is degenerate in the full basis") {
  // Every spin sector holds its own stationary state when gamma_spont = 0.
  const auto ch =
      make_channels(EnsembleSize(4), Basis::full, std::atan(0.3), 1.0, 0.0);
  const auto ns = steady_state_nullspace(ch);
  CHECK(ns.kernel_dim > 1);
}

TEST_CASE("nullspace state is stationary and physical") {
  const auto ch =
      make_channels(EnsembleSize(3), Basis::full, std::atan(0.5), 1.0, 0.2);
  const auto ns = steady_state_nullspace(ch);
  REQUIRE(ns.kernel_dim == 1);
  CHECK(max_abs(rhs_full(ch, ns.state.rho)) < 1e-10);
  const auto h = validate_state(ns.state.rho, true);
  CHECK(h.trace_err < 1e-12);
  CHECK(h.herm_err < 1e-12);
  CHECK(h.min_eig > -1e-10);
}

TEST_CASE("random states are deterministic and physical") {
  const auto a = random_state(EnsembleSize(4), 42);
  const auto b = random_state(EnsembleSize(4), 42);
  const auto c = random_state(EnsembleSize(4), 43);
  CHECK(max_abs(a.rho - b.rho) == 0.0);
  CHECK(max_abs(a.rho - c.rho) > 1e-3);
  CHECK_THAT(a.rho.trace().real(), WithinAbs(1.0, 1e-12));
  // pure: rho^2 = rho
  CHECK(max_abs(a.rho * a.rho - a.rho) < 1e-12);

  const auto p = random_state(EnsembleSize(4), 42, RandomKind::product_random);
  CHECK(max_abs(p.rho * p.rho - p.rho) < 1e-12);
  CHECK_THAT(p.rho.trace().real(), WithinAbs(1.0, 1e-12));
  CHECK(max_abs(p.rho - a.rho) > 1e-3);
}

TEST_CASE("basis and domain guards") {
  CHECK_THROWS_AS(
      make_channels(EnsembleSize(4), Basis::symmetric, 0.3, 1.0, 0.1),
      BasisMismatchError);
  CHECK_THROWS_AS(make_channels(EnsembleSize(4), Basis::full, 0.3, -1.0, 0.0),
                  DomainError);
  const auto sym = make_channels(EnsembleSize(4), Basis::symmetric, 0.3, 1.0, 0.0);
  CHECK_THROWS_AS(rhs_full(sym, DMat::Identity(5, 5)), BasisMismatchError);
  CHECK_THROWS_AS(rhs_cavity(sym, DMat::Identity(4, 4)), BasisMismatchError);
  CHECK_THROWS_AS(evolve(sym, DMat::Identity(3, 3)), BasisMismatchError);

  // positivity floor: a diagonal entry below -1e-6 aborts immediately
  DMat bad = DMat::Zero(5, 5);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(evolve(sym, bad), IntegrationError);
}

TEST_CASE("collective enhancement of the bottom-rung decay rate") {
  // theta = 0: the |m=1> rung drains into the pole through a single ladder
  // hop, d_sz(t) = exp(-2 gamma N t) exactly.  The factor N over the
  // single-atom rate 2 gamma is the superradiant enhancement.
  const int n = 8;
  const double gamma = 1.0;
  const auto ch = make_channels(EnsembleSize(n), Basis::symmetric, 0.0, gamma, 0.0);
  DMat rho = DMat::Zero(n + 1, n + 1);
  rho(1, 1) = 1.0;
  EvolveOptions opt;
  opt.t_max = 0.4;
  opt.sample_dt = 0.2;
  opt.conv_tol_rate = 0.0;
  opt.integ.rtol = 1e-10;
  opt.integ.atol = 1e-12;
  auto tr = evolve(ch, rho, opt);
  REQUIRE(tr.times.size() == 3);
  const double rate =
      std::log(tr.moments[1].d_sz / tr.moments[2].d_sz) / (tr.times[2] - tr.times[1]);
  CHECK_THAT(rate, WithinRel(2.0 * gamma * n, 1e-5));
}

TEST_CASE("asymptotic relaxation rate equals the Liouvillian gap") {
  const int n = 8;
  const double theta = std::atan(0.3);
  const int d = n + 1, sup = d * d;

  // Oracle: dense superoperator over vec(rho), col-major, built from the
  // ladder-formula jump operator; gap = largest nonzero real part.
  const oracle::Mat j = oracle::jump_dense_symmetric(n, theta);
  const oracle::Mat k = j.adjoint() * j;
  oracle::Mat m = oracle::Mat::Zero(sup, sup);
  for (int jc = 0; jc < d; ++jc)
    for (int jr = 0; jr < d; ++jr)
      for (int ic = 0; ic < d; ++ic)
        for (int ir = 0; ir < d; ++ir) {
          cd v = 2.0 * std::conj(j(jr, jc)) * j(ir, ic);
          if (jr == jc) v -= k(ir, ic);
          if (ir == ic) v -= k(jc, jr);
          m(ir + d * jr, ic + d * jc) += v;
        }
  Eigen::ComplexEigenSolver<oracle::Mat> es(m);
  double gap = -1e300;
  for (int i = 0; i < sup; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re < -1e-8 && re > gap) gap = re;
  }
  gap = -gap;

  const auto ch = make_channels(EnsembleSize(n), Basis::symmetric, theta, 1.0, 0.0);
  const auto st = dark_state(EnsembleSize(n), 0.3);
  const DMat dark = st.c * st.c.adjoint();
  const auto dist_at = [&](double t_end) {
    EvolveOptions opt;
    opt.t_max = t_end;
    opt.conv_tol_rate = 0.0;
    opt.integ.rtol = 1e-10;
    opt.integ.atol = 1e-12;
    return (evolve(ch, polarized_state(EnsembleSize(n), Basis::symmetric).rho, opt)
                .rho_final -
            dark)
        .norm();
  };
  const double rate = std::log(dist_at(1.5) / dist_at(2.5));
  CHECK_THAT(rate, WithinRel(gap, 0.02));
}
