#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qbattery/opalg.hpp"

using namespace qb;
using qbtest::max_abs;

TEST_CASE("kron of identities and diagonal factors") {
  CHECK(max_abs(kron(identity(2), identity(2)) - identity(4)) == 0.0);
  ComplexMatrix z = kron(sigma_z(), identity(2));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 1.0, 1.0, -1.0, -1.0;
  CHECK(max_abs(z - expected) == 0.0);
}

TEST_CASE("kron index formula on sigma+ x sigma-") {
  ComplexMatrix k = kron(sigma_plus(), sigma_minus());
  // a[i,j] b[k,l] lands at (i*2+k, j*2+l); only a[0,1] and b[1,0] are nonzero.
  CHECK(k(0 * 2 + 1, 1 * 2 + 0) == cplx(1.0));
  CHECK(k.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("kron is associative on integer matrices") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(-3, 3);
  auto rnd = [&](int r, int c) {
    ComplexMatrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cplx(u(rng), u(rng));
    return m;
  };
  ComplexMatrix a = rnd(2, 2), b = rnd(3, 3), c = rnd(2, 2);
  CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) == 0.0);
}

TEST_CASE("herm_eig") {
  auto z = herm_eig(sigma_z());
  CHECK(z.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(z.eigenvalues(1) == doctest::Approx(1.0));

  auto x = herm_eig(sigma_x());
  CHECK(x.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(x.eigenvalues(1) == doctest::Approx(1.0));
  ComplexVector minus(2), plus(2);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(std::abs(x.eigenvectors.col(0).dot(minus)) == doctest::Approx(1.0));
  CHECK(std::abs(x.eigenvectors.col(1).dot(plus)) == doctest::Approx(1.0));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix a = qbtest::random_hermitian(4, rng);
    auto es = herm_eig(a);
    ComplexMatrix V = es.eigenvectors;
    ComplexMatrix back = V * es.eigenvalues.cast<cplx>().asDiagonal() * V.adjoint();
    CHECK(max_abs(a - back) <= 1e-10);
    CHECK(max_abs(V.adjoint() * V - identity(4)) <= 1e-10);
    for (int k = 1; k < 4; ++k) CHECK(es.eigenvalues(k) >= es.eigenvalues(k - 1));
  }
  CHECK_THROWS_AS(herm_eig(sigma_plus()), Error);
}

TEST_CASE("expect") {
  ComplexMatrix g = ComplexMatrix::Zero(2, 2);
  g(1, 1) = 1.0;
  CHECK(expect(sigma_z(), g).real() == doctest::Approx(-1.0));
  CHECK(std::abs(expect(sigma_z(), identity(2) / 2.0)) < 1e-15);
  ComplexMatrix coh = projector(coherent(30, 0.5));
  CHECK(std::abs(expect(number(30), coh) - 0.25) < 1e-8);
  CHECK_THROWS_AS(expect(sigma_z(), identity(3) / 3.0), Error);
}

TEST_CASE("partial_trace") {
  std::mt19937_64 rng(3);
  ComplexMatrix ra = qbtest::random_density(2, rng), rb = qbtest::random_density(3, rng);
  ComplexMatrix prod = kron(ra, rb);
  CHECK(max_abs(partial_trace(prod, {2, 3}, 1) - rb) < 1e-14);
  CHECK(max_abs(partial_trace(prod, {2, 3}, 0) - ra) < 1e-14);

  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  CHECK(max_abs(partial_trace(projector(bell), {2, 2}, 0) - identity(2) / 2.0) < 1e-15);

  // Explicit double-index summation.
  ComplexMatrix r = qbtest::random_density(4, rng);
  ComplexMatrix keep0 = ComplexMatrix::Zero(2, 2), keep1 = ComplexMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        keep0(i, j) += r(i * 2 + k, j * 2 + k);
        keep1(i, j) += r(k * 2 + i, k * 2 + j);
      }
  CHECK(max_abs(partial_trace(r, {2, 2}, 0) - keep0) <= 1e-14);
  CHECK(max_abs(partial_trace(r, {2, 2}, 1) - keep1) <= 1e-14);

  ComplexMatrix r3 = qbtest::random_density(12, rng);
  for (int keep = 0; keep < 3; ++keep) {
    ComplexMatrix p = partial_trace(r3, {2, 3, 2}, keep);
    CHECK(std::abs(p.trace() - r3.trace()) < 1e-12);
    CHECK(is_hermitian(p, 1e-12));
  }
  CHECK_THROWS_AS(partial_trace(r3, {2, 2}, 0), Error);
}

TEST_CASE("expect on a kept subsystem matches the reduced state") {
  std::mt19937_64 rng(5);
  ComplexMatrix r = qbtest::random_density(6, rng);
  ComplexMatrix op = qbtest::random_hermitian(3, rng);
  cplx full = expect(kron(identity(2), op), r);
  cplx reduced = expect(op, partial_trace(r, {2, 3}, 1));
  CHECK(std::abs(full - reduced) < 1e-13);
}
