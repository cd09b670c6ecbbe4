#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "qbattery/models.hpp"

using namespace qb;
using qbtest::max_abs;

namespace {

std::vector<double> eigenvalues(const ComplexMatrix& h) {
  auto es = herm_eig(h);
  return {es.eigenvalues.data(), es.eigenvalues.data() + es.eigenvalues.size()};
}

void check_structure(const ModelSpec& m) {
  CHECK(is_hermitian(m.jump, 0.0));
  CHECK(hermiticity_error(m.hamiltonian) <= 1e-12);
  CHECK(max_abs(m.jump * m.charger_h - m.charger_h * m.jump) <= 1e-12);
  CHECK(m.battery_h.rows() == m.battery_dim());
}

}  // namespace

TEST_CASE("two-TLS spectrum at resonance without drive") {
  Params p;
  p.g = 1.0;
  auto ev = eigenvalues(build_two_tls(p).hamiltonian);
  std::vector<double> expected{-1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < 4; ++i) CHECK(ev[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("two-TLS without coupling or drive is diagonal") {
  Params p;
  p.g = 0.0;
  p.delta_Cd = 0.3;
  p.delta_Bd = -0.2;
  ModelSpec m = build_two_tls(p);
  ComplexMatrix off = m.hamiltonian;
  off.diagonal().setZero();
  CHECK(max_abs(off) == 0.0);
  // Basis |ee>, |eg>, |ge>, |gg>.
  CHECK(m.hamiltonian(0, 0).real() == doctest::Approx(0.1));
  CHECK(m.hamiltonian(1, 1).real() == doctest::Approx(0.3));
  CHECK(m.hamiltonian(2, 2).real() == doctest::Approx(-0.2));
  CHECK(m.hamiltonian(3, 3).real() == 0.0);
}

TEST_CASE("structural invariants for all builders") {
  for (double F : {0.0, 0.5, 3.0})
    for (double d : {0.0, 0.4}) {
      Params p;
      p.F = F;
      p.delta_Cd = d;
      p.delta_Bd = d / 2;
      p.gamma_C = 1.0;
      check_structure(build_two_tls(p));
      check_structure(build_two_ho(p, 5));
      check_structure(build_tls_ho(p, 5));
      for (int n = 1; n <= 4; ++n) check_structure(build_star_tls(p, n));
    }
  Params p;
  p.F = 0.7;
  check_structure(build_two_ho(p, 6, Frame::Displaced));
  check_structure(build_tls_ho(p, 6, Frame::Displaced));
}

TEST_CASE("two-HO at cutoff 2 is the two-TLS model in reversed level order") {
  Params p;
  p.F = 0.5;
  p.delta_Cd = 0.2;
  p.delta_Bd = 0.1;
  ModelSpec ho = build_two_ho(p, 2);
  ModelSpec tls = build_two_tls(p);
  // Fock |0>,|1> versus TLS |e>,|g>: index k maps to 1-k on each factor.
  ComplexMatrix P = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) P(3 - i, i) = 1.0;
  CHECK(max_abs(P * ho.hamiltonian * P.adjoint() - tls.hamiltonian) == 0.0);
  CHECK(max_abs(P * ho.jump * P.adjoint() - tls.jump) == 0.0);
  // Before the reordering they differ entrywise.
  CHECK(max_abs(ho.hamiltonian - tls.hamiltonian) > 0.1);
}

TEST_CASE("ladder operators") {
  ComplexMatrix a = destroy(4);
  ComplexMatrix n = a.adjoint() * a;
  for (int k = 0; k < 4; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
  ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
  ComplexMatrix expected = identity(4);
  expected(3, 3) = 1.0 - 4.0;
  CHECK(max_abs(comm - expected) < 1e-14);
}

TEST_CASE("TLS-HO builder") {
  Params p;
  p.g = 0.0;
  p.delta_Cd = 0.5;
  ModelSpec free = build_tls_ho(p, 4);
  ComplexMatrix off = free.hamiltonian;
  off.diagonal().setZero();
  CHECK(max_abs(off) == 0.0);

  p = Params{};
  p.g = 0.8;
  ModelSpec m = build_tls_ho(p, 4);
  // Single-excitation sector {|e,0>, |g,1>}: indices 0*4+0 and 1*4+1.
  ComplexMatrix blk(2, 2);
  blk << m.hamiltonian(0, 0), m.hamiltonian(0, 5), m.hamiltonian(5, 0), m.hamiltonian(5, 5);
  auto ev = eigenvalues(blk);
  CHECK(ev[0] == doctest::Approx(-0.8));
  CHECK(ev[1] == doctest::Approx(0.8));
  CHECK(max_abs(m.jump * m.jump - m.jump) == 0.0);
  CHECK_THROWS_AS(build_tls_ho(p, 1), Error);
  CHECK_THROWS_AS(build_two_ho(p, 1), Error);
}

TEST_CASE("star configuration") {
  Params p;
  p.F = 0.3;
  p.delta_Cd = 0.1;
  p.delta_Bd = 0.05;
  ModelSpec one = build_star_tls(p, 1);
  ModelSpec two_tls = build_two_tls(p);
  CHECK(max_abs(one.hamiltonian - two_tls.hamiltonian) == 0.0);
  CHECK(max_abs(one.jump - two_tls.jump) == 0.0);
  CHECK(max_abs(one.battery_h - two_tls.battery_h) == 0.0);

  Params q;
  q.g = 1.0;
  ModelSpec m = build_star_tls(q, 2);
  // Single-excitation states: |e,g,g>, |g,e,g>, |g,g,e> -> indices 3, 5, 6.
  const int idx[3] = {3, 5, 6};
  ComplexMatrix blk(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) blk(i, j) = m.hamiltonian(idx[i], idx[j]);
  auto ev = eigenvalues(blk);
  CHECK(ev[0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(std::abs(ev[1]) < 1e-12);
  CHECK(ev[2] == doctest::Approx(std::sqrt(2.0)));

  for (int n = 1; n <= 6; ++n) {
    ModelSpec s = build_star_tls(q, n);
    CHECK(max_abs(s.jump - embed(sigma_plus() * sigma_minus(), {2, 1 << n}, 0)) == 0.0);
  }
  CHECK_THROWS_AS(build_star_tls(q, 7), Error);
}

TEST_CASE("parameter validation") {
  Params p;
  p.gamma_C = -1.0;
  CHECK_THROWS_AS(build_two_tls(p), ValidationError);
  p.gamma_C = 0.0;
  p.delta_Cd = 0.1;
  CHECK_THROWS_AS(build_two_ho(p, 4, Frame::Displaced), Error);
}

TEST_CASE("default cutoff and validity check") {
  Params p;
  p.F = 0.5;
  CHECK(default_cutoff(p) == 2 + 2 + 3);
  p.F = 0.0;
  CHECK(default_cutoff(p) == 2);
  p.F = 3.0;
  CHECK(default_cutoff(p) == 2 + 72 + 18);

  Params q;
  q.F = 0.5;
  ModelSpec m = build_two_ho(q, 4);
  ComplexMatrix rho = initial_state(m);
  CHECK_NOTHROW(check_cutoff(m, rho));
  ComplexMatrix top = ComplexMatrix::Zero(16, 16);
  top(15, 15) = 1.0;
  CHECK_THROWS_AS(check_cutoff(m, top), Error);
}

TEST_CASE("initial states") {
  Params p;
  p.F = 0.4;
  ModelSpec tls = build_two_tls(p);
  ComplexMatrix r = initial_state(tls);
  CHECK(r(3, 3).real() == 1.0);

  ModelSpec th = build_tls_ho(p, 8);
  CHECK(initial_state(th)(8, 8).real() == 1.0);  // |g> (x) |0>

  ModelSpec disp = build_two_ho(p, 20, Frame::Displaced);
  ComplexMatrix rd = initial_state(disp);
  CHECK(std::abs(rd.trace() - 1.0) < 1e-14);
  // Lab-frame battery energy vanishes at t=0.
  CHECK(std::abs(expect(disp.battery_h, battery_state(disp, rd))) < 1e-12);
}
