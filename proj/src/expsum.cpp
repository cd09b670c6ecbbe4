#include "qbattery/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace qb {

void ExpSum::append(const ExpSum& o, double scale) {
  offset += scale * o.offset;
  for (const auto& t : o.terms) terms.push_back({scale * t.amp, t.rate, t.power});
}

double ExpSum::operator()(double t) const {
  double acc = offset;
  for (const auto& k : terms) {
    cplx v = k.amp * std::exp(k.rate * t);
    if (k.power) v *= std::pow(t, k.power);
    acc += v.real();
  }
  return acc;
}

double ExpSum::limit(double rate_tol) const {
  double acc = offset;
  for (const auto& k : terms)
    if (k.power == 0 && std::abs(k.rate) <= rate_tol) acc += k.amp.real();
  return acc;
}

void ExpSum::simplify(double tol, double rate_tol) {
  std::vector<Term> kept;
  for (const auto& k : terms) {
    if (std::abs(k.amp) <= tol) continue;
    if (k.power == 0 && std::abs(k.rate) <= rate_tol) {
      offset += k.amp.real();
      continue;
    }
    kept.push_back(k);
  }
  terms = std::move(kept);
}

ExpSum damped_kernel_terms(double gamma, double k2) {
  ExpSum s;
  const cplx q(-gamma / 4, 0.0);
  const cplx k = std::sqrt(cplx(k2, 0.0));
  if (std::abs(k) <= 1e-7 * std::max(1.0, gamma)) {
    s.add(1.0, q);
    s.add(gamma / 4, q, 1);
    return s;
  }
  s.add(0.5 * (1.0 + gamma / (4.0 * k)), q + k);
  s.add(0.5 * (1.0 - gamma / (4.0 * k)), q - k);
  return s;
}

ExpSum spectral_expsum(const ComplexMatrix& G, const ComplexVector& v0, const ComplexVector& w) {
  ExpSum s;
  if (G.rows() == 0) return s;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(G);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "eigensolver failed");
  const ComplexMatrix& V = es.eigenvectors();
  Eigen::PartialPivLU<ComplexMatrix> lu(V);
  const ComplexVector c = lu.solve(v0);
  const ComplexVector wv = V.transpose() * w;
  for (Eigen::Index k = 0; k < G.rows(); ++k) s.add(wv(k) * c(k), es.eigenvalues()(k));

  const double rho = std::max(1e-3, es.eigenvalues().cwiseAbs().maxCoeff());
  const double scale = std::max(1.0, w.cwiseAbs().sum() * v0.cwiseAbs().maxCoeff());
  for (double t : {0.0, 0.7 / rho, 3.1 / rho}) {
    const ComplexMatrix E = (G * cplx(t)).exp();
    const double direct = (w.transpose() * E * v0)(0).real();
    if (!(std::abs(direct - s(t)) <= 1e-9 * scale))
      throw Error(ErrorKind::SingularMatrix, "generator too close to defective for a spectral sum");
  }
  return s;
}

namespace {

double term_envelope(const ExpSum::Term& k, double t) {
  double v = std::abs(k.amp) * std::exp(k.rate.real() * t);
  if (k.power) v *= std::pow(t, k.power);
  return v;
}

}  // namespace

ChargingReport charging_time(const ExpSum& f, double e_ss, int n) {
  ChargingReport rep;
  rep.n = n;
  rep.e_ss = e_ss;
  const double gap0 = std::abs(f(0.0) - e_ss);
  if (gap0 == 0.0) throw Error(ErrorKind::InvalidArgument, "initial energy equals e_ss");
  const double thr = std::exp(-static_cast<double>(n)) * gap0;

  double max_rate = 0.0;
  for (const auto& k : f.terms) max_rate = std::max(max_rate, std::abs(k.rate));
  const double rate_tol = 1e-11 * std::max(1.0, max_rate);

  // Persistent part: limit mismatch plus undamped oscillations.
  double limit = f.offset, osc = 0.0;
  std::vector<ExpSum::Term> decaying;
  for (const auto& k : f.terms) {
    if (k.rate.real() < -rate_tol)
      decaying.push_back(k);
    else if (std::abs(k.rate) <= rate_tol && k.power == 0)
      limit += k.amp.real();
    else
      osc += std::abs(k.amp);
  }
  const double persistent = std::abs(limit - e_ss) + osc;
  if (persistent >= thr)
    throw Error(ErrorKind::NotConverged, "energy does not settle within e^-n of e_ss (residual " +
                                             std::to_string(persistent) + ")");

  auto bound = [&](double t) {
    double b = persistent;
    for (const auto& k : decaying) b += term_envelope(k, t);
    return b;
  };
  double slowest = INFINITY;
  for (const auto& k : decaying) slowest = std::min(slowest, -k.rate.real());
  double T = decaying.empty() ? 0.0 : 1.0 / slowest;
  while (bound(T) >= thr) {
    T *= 2;
    if (T > 1e15) throw Error(ErrorKind::NotConverged, "no horizon found for the charging time");
  }
  // Tighten the start of the scan: B is decreasing in t once all power terms have peaked.
  double lo = 0.0, hi = T;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) >= thr ? lo : hi) = mid;
  }
  rep.horizon = hi;

  auto excess = [&](double t) { return std::abs(f(t) - e_ss) - thr; };
  auto frequency = [&](double t) {
    double w = 0.0;
    for (const auto& k : f.terms)
      if (k.rate.real() >= -rate_tol || term_envelope(k, t) > 1e-4 * thr)
        w = std::max(w, std::abs(k.rate.imag()));
    return w;
  };
  double t = hi;
  double tau = 0.0;
  bool found = false;
  while (t > 0) {
    const double w = frequency(t);
    double h = hi / 4000;
    if (w > 0) h = std::min(h, 0.1 / w);
    const double t0 = std::max(0.0, t - h);
    if (excess(t0) >= 0) {
      double a = t0, b = t;
      while (b - a > 1e-10 * std::max(1.0, b)) {
        const double mid = 0.5 * (a + b);
        (excess(mid) >= 0 ? a : b) = mid;
      }
      tau = 0.5 * (a + b);
      found = true;
      break;
    }
    t = t0;
  }
  if (!found) tau = 0.0;
  rep.tau = tau;

  // Largest energy before tau.
  double wmax = 0.0;
  for (const auto& k : f.terms) wmax = std::max(wmax, std::abs(k.rate.imag()));
  const double span = std::max(tau, 1e-12);
  const long samples = std::clamp<long>(wmax > 0 ? static_cast<long>(10 * span * wmax) : 2000, 2000, 400000);
  double emax = f(0.0);
  for (long i = 1; i <= samples; ++i) emax = std::max(emax, f(span * i / samples));
  rep.e_max_transient = emax;
  rep.converged = true;
  return rep;
}

}  // namespace qb
