#pragma once

#include <functional>
#include <vector>

#include "qbattery/opalg.hpp"
#include "qbattery/timeseries.hpp"

namespace qb {

struct ChargingReport {
  double tau = 0.0;
  int n = 1;
  double e_ss = 0.0;
  double e_max_transient = 0.0;
  double gamma_C = 0.0;
  double horizon = 0.0;
  bool converged = false;
};

double energy(const ComplexMatrix& rho_B, const ComplexMatrix& h_B);

/// Passive-state ergotropy: populations descending against energies ascending.
double ergotropy(const ComplexMatrix& rho_B, const ComplexMatrix& h_B);

/// TLS ergotropy from <sigma_z> and |<sigma_->|.
double tls_ergotropy(double sz, double abs_sm, double omega_B = 1.0);

/// von Neumann entropy (natural log).
double entropy(const ComplexMatrix& rho_B);

/// TLS entropy expressed through energy and ergotropy: binary entropy of (E - erg)/omega.
double tls_entropy_from_energy(double energy, double ergotropy, double omega_B = 1.0);

/// Last-root charging time on a sampled energy function. `energy_at` refines the bracket
/// by bisection; samples must start at the initial time. Throws NotConverged.
ChargingReport charging_time(const std::vector<double>& t, const std::vector<double>& e,
                             double e_ss, int n,
                             const std::function<double(double)>& energy_at = {});

ChargingReport charging_time(const TimeSeries& series, double e_ss, int n,
                             const std::string& column = "energy");

}  // namespace qb
