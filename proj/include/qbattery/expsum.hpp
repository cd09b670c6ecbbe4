#pragma once

#include <vector>

#include "qbattery/metrics.hpp"
#include "qbattery/opalg.hpp"

namespace qb {

/// f(t) = offset + Re sum_k amp_k t^{power_k} exp(rate_k t).
struct ExpSum {
  struct Term {
    cplx amp;
    cplx rate;
    int power = 0;
  };
  double offset = 0.0;
  std::vector<Term> terms;

  void add(cplx amp, cplx rate, int power = 0) { terms.push_back({amp, rate, power}); }
  void append(const ExpSum& o, double scale = 1.0);
  double operator()(double t) const;
  /// Long-time limit when every other term decays.
  double limit(double rate_tol = 1e-11) const;

  /// Drops terms below `tol` in amplitude and folds non-decaying, non-oscillating ones
  /// into the offset. Rates with |rate| <= rate_tol count as zero.
  void simplify(double tol = 1e-15, double rate_tol = 1e-11);
};

/// exp(-gamma t/4) [cosh(k t) + gamma/(4k) sinh(k t)], k^2 = k2 of either sign.
ExpSum damped_kernel_terms(double gamma, double k2);

/// Re w^T exp(G t) v0 through the eigendecomposition of G. Checked against the matrix
/// exponential at a few times; throws SingularMatrix when G is too close to defective.
ExpSum spectral_expsum(const ComplexMatrix& G, const ComplexVector& v0, const ComplexVector& w);

/// Last-root charging time of an exponential sum. The threshold is e^{-n} |f(0) - e_ss|.
/// Throws NotConverged when the sum does not settle within the threshold of e_ss.
ChargingReport charging_time(const ExpSum& f, double e_ss, int n);

}  // namespace qb
