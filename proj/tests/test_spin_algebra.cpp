#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "sqz/spin_algebra.hpp"

using namespace sqz;
using Catch::Matchers::WithinAbs;

namespace {

DMat dense(const SpMat& m) { return DMat(m); }

double max_abs(const DMat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("ladder matrix elements") {
  CHECK(ladder_element(1.0, 1.0) == 0.0);
  CHECK_THAT(ladder_element(1.0, -1.0), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THAT(ladder_element(0.5, -0.5), WithinAbs(1.0, 1e-15));
  CHECK_THAT(ladder_element(1.0, 0.0), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THROWS_AS(ladder_element(1.0, 2.0), DomainError);
  CHECK_THROWS_AS(ladder_element(1.0, -0.5), DomainError);
}

TEST_CASE("collective operators, symmetric sector, N=2") {
  const EnsembleSize n(2);
  const DMat sz = dense(build_collective(OpKind::Sz, n, Basis::symmetric).mat);
  REQUIRE(sz.rows() == 3);
  CHECK_THAT(sz(0, 0).real(), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(sz(1, 1).real(), WithinAbs(0.0, 1e-15));
  CHECK_THAT(sz(2, 2).real(), WithinAbs(1.0, 1e-15));

  const DMat s2 = dense(build_collective(OpKind::S2, n, Basis::symmetric).mat);
  CHECK(max_abs(s2 - 2.0 * DMat::Identity(3, 3)) < 1e-14);

  const DMat sp = dense(build_collective(OpKind::Sp, n, Basis::symmetric).mat);
  CHECK_THAT(std::abs(sp(1, 0)), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THAT(std::abs(sp(2, 1)), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THAT(std::abs(sp(0, 1)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("collective raising on the full basis, N=2") {
  const EnsembleSize n(2);
  const DMat sp = dense(build_collective(OpKind::Sp, n, Basis::full).mat);
  DVec down = DVec::Zero(4);
  down(0) = 1.0;  // |-->
  const DVec lifted = sp * down;
  // S+ |--> = |+-> + |-+>  (indices 1 and 2)
  CHECK_THAT(std::abs(lifted(1)), WithinAbs(1.0, 1e-15));
  CHECK_THAT(std::abs(lifted(2)), WithinAbs(1.0, 1e-15));
  CHECK_THAT(std::abs(lifted(0)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(lifted(3)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("adjointness and commutators on both bases") {
  for (const Basis basis : {Basis::symmetric, Basis::full}) {
    for (int N : {1, 2, 3, 4, 5, 6}) {
      const EnsembleSize n(N);
      const DMat sp = dense(build_collective(OpKind::Sp, n, basis).mat);
      const DMat sm = dense(build_collective(OpKind::Sm, n, basis).mat);
      const DMat sz = dense(build_collective(OpKind::Sz, n, basis).mat);
      const DMat sx = dense(build_collective(OpKind::Sx, n, basis).mat);
      const DMat sy = dense(build_collective(OpKind::Sy, n, basis).mat);

      INFO("basis " << to_string(basis) << " N " << N);
      CHECK(max_abs(sp - sm.adjoint()) <= 1e-14);
      CHECK(max_abs(sp * sm - sm * sp - 2.0 * sz) <= 1e-12);
      CHECK(max_abs(sx * sy - sy * sx - cd(0, 1) * sz) <= 1e-12);
    }
  }
}

TEST_CASE("full-basis operators restricted to the Dicke span reproduce the sector") {
  for (int N : {2, 3, 4, 5, 6}) {
    const EnsembleSize n(N);
    const DMat e = dense(dicke_embedding(n));
    CHECK(max_abs(e.adjoint() * e - DMat::Identity(N + 1, N + 1)) <= 1e-13);
    for (const OpKind k :
         {OpKind::Sp, OpKind::Sm, OpKind::Sz, OpKind::Sx, OpKind::Sy, OpKind::S2}) {
      const DMat full = dense(build_collective(k, n, Basis::full).mat);
      const DMat sym = dense(build_collective(k, n, Basis::symmetric).mat);
      INFO("N " << N << " kind " << static_cast<int>(k));
      CHECK(max_abs(e.adjoint() * full * e - sym) <= 1e-12);
    }
  }
}

TEST_CASE("jump operator limits and bands") {
  const EnsembleSize n(2);
  const DMat sm = dense(build_collective(OpKind::Sm, n, Basis::symmetric).mat);
  const DMat sx = dense(build_collective(OpKind::Sx, n, Basis::symmetric).mat);

  CHECK(max_abs(dense(jump_operator(0.0, n, Basis::symmetric).mat) - sm) <= 1e-15);
  CHECK(max_abs(dense(jump_operator(std::acos(-1.0) / 4, n, Basis::symmetric).mat) -
                std::sqrt(2.0) * sx) <= 1e-15);

  // tan(theta) = 0.2; with m ascending in Sz, the S+ part sits below the
  // diagonal and the S- part above it.
  const double theta = std::atan(0.2);
  const DMat j = dense(jump_operator(theta, n, Basis::symmetric).mat);
  CHECK_THAT(j(1, 0).real(), WithinAbs(std::sin(theta) * std::sqrt(2.0), 1e-15));
  CHECK_THAT(j(2, 1).real(), WithinAbs(std::sin(theta) * std::sqrt(2.0), 1e-15));
  CHECK_THAT(j(0, 1).real(), WithinAbs(std::cos(theta) * std::sqrt(2.0), 1e-15));
  CHECK_THAT(j(1, 2).real(), WithinAbs(std::cos(theta) * std::sqrt(2.0), 1e-15));

  CHECK_THROWS_AS(jump_operator(-0.1, n, Basis::symmetric), DomainError);
  CHECK_THROWS_AS(jump_operator(std::acos(-1.0) / 2, n, Basis::symmetric), DomainError);
}

TEST_CASE("single-atom channels") {
  const EnsembleSize n(2);

  SECTION("theta = 0: only the strong leg survives") {
    const auto ops = single_atom_jumps(0.0, 1, n);
    REQUIRE(ops.size() == 3);
    CHECK(max_abs(dense(ops[0].mat)) == 0.0);  // sigma+ channel vanishes
    // sigma- channel = |+><+| on atom 1: diagonal on indices with bit 0 set.
    const DMat p = dense(ops[1].mat);
    CHECK_THAT(p(1, 1).real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(p(3, 3).real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(std::abs(p(0, 0)), WithinAbs(0.0, 1e-15));
    // pi channel = sigma-_1.
    const DMat f = dense(ops[2].mat);
    CHECK_THAT(f(0, 1).real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(f(2, 3).real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(std::abs(f(1, 0)), WithinAbs(0.0, 1e-15));
  }

  SECTION("theta = pi/4: symmetric point") {
    const double w = 1.0 / std::sqrt(2.0);
    const auto ops = single_atom_jumps(std::acos(-1.0) / 4, 2, n);
    const DMat flip = dense(ops[2].mat);
    // (sigma+ + sigma-)/sqrt(2) on atom 2 (bit 1).
    CHECK_THAT(flip(2, 0).real(), WithinAbs(w, 1e-15));
    CHECK_THAT(flip(0, 2).real(), WithinAbs(w, 1e-15));
    CHECK_THAT(dense(ops[0].mat)(0, 0).real(), WithinAbs(w, 1e-15));
    CHECK_THAT(dense(ops[1].mat)(2, 2).real(), WithinAbs(w, 1e-15));
  }

  SECTION("explicit 4x4 embedding at tan(theta) = 0.2, atom 1") {
    const double theta = std::atan(0.2);
    const double sn = std::sin(theta), cs = std::cos(theta);
    const auto ops = single_atom_jumps(theta, 1, n);
    const DMat lp = dense(ops[0].mat), lm = dense(ops[1].mat), lf = dense(ops[2].mat);
    // Projector channels: sin(t) on bit-0-clear, cos(t) on bit-0-set.
    CHECK_THAT(lp(0, 0).real(), WithinAbs(sn, 1e-15));
    CHECK_THAT(lp(2, 2).real(), WithinAbs(sn, 1e-15));
    CHECK_THAT(std::abs(lp(1, 1)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(lm(1, 1).real(), WithinAbs(cs, 1e-15));
    CHECK_THAT(lm(3, 3).real(), WithinAbs(cs, 1e-15));
    // Flip channel mixes sigma+ (amplitude sin) and sigma- (amplitude cos).
    CHECK_THAT(lf(1, 0).real(), WithinAbs(sn, 1e-15));
    CHECK_THAT(lf(0, 1).real(), WithinAbs(cs, 1e-15));
    CHECK_THAT(lf(3, 2).real(), WithinAbs(sn, 1e-15));
    CHECK_THAT(lf(2, 3).real(), WithinAbs(cs, 1e-15));
    CHECK_THAT(std::abs(lf(3, 0)), WithinAbs(0.0, 1e-15));
  }

  CHECK_THROWS_AS(single_atom_jumps(0.1, 0, n), DomainError);
  CHECK_THROWS_AS(single_atom_jumps(0.1, 3, n), DomainError);
}

TEST_CASE("full-space cap") {
  CHECK_THROWS_AS(build_collective(OpKind::Sz, EnsembleSize(13), Basis::full),
                  CapacityError);
  CHECK_NOTHROW(build_collective(OpKind::Sz, EnsembleSize(13), Basis::symmetric));
  // Cap is configurable.
  CHECK_NOTHROW(build_collective(OpKind::Sz, EnsembleSize(4), Basis::full, 4));
  CHECK_THROWS_AS(build_collective(OpKind::Sz, EnsembleSize(5), Basis::full, 4),
                  CapacityError);
}

TEST_CASE("dicke embedding columns are the normalized symmetric states") {
  const EnsembleSize n(4);
  const DMat e = dense(dicke_embedding(n));
  // m = 0 column is the single fully polarized basis state.
  CHECK_THAT(std::abs(e(0, 0)), WithinAbs(1.0, 1e-15));
  // m = 2 column spreads over C(4,2) = 6 states with equal weight.
  CHECK_THAT(std::abs(e(3, 2)), WithinAbs(1.0 / std::sqrt(6.0), 1e-15));
  CHECK_THAT(std::abs(e(5, 2)), WithinAbs(1.0 / std::sqrt(6.0), 1e-15));
}
