#pragma once

#include <random>

#include "qbattery/opalg.hpp"

namespace qbtest {

inline qb::ComplexMatrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  qb::ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = qb::cplx(n(rng), n(rng));
  return m;
}

inline qb::ComplexMatrix random_hermitian(int d, std::mt19937_64& rng) {
  qb::ComplexMatrix m = random_matrix(d, rng);
  return (m + m.adjoint()) / 2.0;
}

inline qb::ComplexMatrix random_density(int d, std::mt19937_64& rng) {
  qb::ComplexMatrix m = random_matrix(d, rng);
  qb::ComplexMatrix r = m * m.adjoint();
  return r / r.trace();
}

inline double max_abs(const qb::ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qbtest
