#include "qbattery/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace qb {

double energy(const ComplexMatrix& rho_B, const ComplexMatrix& h_B) {
  return expect(h_B, rho_B).real();
}

double ergotropy(const ComplexMatrix& rho_B, const ComplexMatrix& h_B) {
  if (rho_B.rows() != h_B.rows() || rho_B.cols() != h_B.cols())
    throw Error(ErrorKind::DimMismatch, "ergotropy: state and Hamiltonian dimensions differ");
  const auto pr = herm_eig(rho_B);
  const auto eh = herm_eig(h_B);
  const Eigen::Index d = rho_B.rows();
  double passive = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) passive += pr.eigenvalues(d - 1 - k) * eh.eigenvalues(k);
  return std::max(0.0, energy(rho_B, h_B) - passive);
}

double tls_ergotropy(double sz, double abs_sm, double omega_B) {
  return 0.5 * omega_B * (std::sqrt(sz * sz + 4 * abs_sm * abs_sm) + sz);
}

double entropy(const ComplexMatrix& rho_B) {
  const auto es = herm_eig(rho_B);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues.size(); ++k) {
    const double p = es.eigenvalues(k);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

double tls_entropy_from_energy(double energy, double ergotropy, double omega_B) {
  const double x = (energy - ergotropy) / omega_B;
  auto h = [](double p) { return p > 1e-14 ? -p * std::log(p) : 0.0; };
  return h(x) + h(1.0 - x);
}

ChargingReport charging_time(const std::vector<double>& t, const std::vector<double>& e,
                             double e_ss, int n, const std::function<double(double)>& energy_at) {
  if (t.size() != e.size() || t.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "charging_time needs at least two samples");
  ChargingReport rep;
  rep.n = n;
  rep.e_ss = e_ss;
  rep.horizon = t.back();
  rep.e_max_transient = *std::max_element(e.begin(), e.end());
  const double gap0 = std::abs(e.front() - e_ss);
  if (gap0 == 0.0) throw Error(ErrorKind::InvalidArgument, "initial energy equals e_ss");
  const double thr = std::exp(-static_cast<double>(n)) * gap0;
  auto excess = [&](double v) { return std::abs(v - e_ss) - thr; };

  std::size_t k = e.size();
  for (std::size_t i = e.size(); i-- > 0;)
    if (excess(e[i]) >= 0) {
      k = i;
      break;
    }
  if (k + 1 >= e.size()) {
    rep.converged = false;
    throw Error(ErrorKind::NotConverged,
                "threshold still exceeded at horizon t=" + std::to_string(t.back()));
  }
  double lo = t[k], hi = t[k + 1];
  double flo = excess(e[k]), fhi = excess(e[k + 1]);
  if (energy_at) {
    while (hi - lo > 1e-7 * hi) {
      const double mid = 0.5 * (lo + hi);
      const double fm = excess(energy_at(mid));
      if (fm >= 0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    rep.tau = 0.5 * (lo + hi);
  } else {
    rep.tau = lo + (hi - lo) * flo / (flo - fhi);
  }
  rep.converged = true;
  return rep;
}

ChargingReport charging_time(const TimeSeries& series, double e_ss, int n,
                             const std::string& column) {
  return charging_time(series.times, series.col(column), e_ss, n);
}

}  // namespace qb
