#pragma once

#include "qbattery/expsum.hpp"
#include "qbattery/models.hpp"

namespace qb {

struct ChiArgs {
  double gamma_C = 0.0;
  double g = 1.0;
  double f = 0.5;
};

/// cosh(k t) + gamma/(4k) sinh(k t), k = sqrt(gamma^2 - 32 f g^2)/4 (any sign under the root).
double chi(const ChiArgs& a, double t);

/// exp(-gamma t/4) * chi, evaluated without overflow for large t.
double damped_chi(const ChiArgs& a, double t);

/// exp(-gamma t/4) [cosh(k t) + gamma/(4k) sinh(k t)] for k^2 = k2 (any sign).
double damped_kernel(double gamma, double k2, double t);

/// Branch constants f_i and amplitudes c_i of the resonant two-TLS energy, indexed 0..2.
struct TlsBranches {
  double f[3];
  double c[3];
};
TlsBranches tls_branches(double F_over_g);

double tls_energy_closed(const Params& p, double t);
cplx tls_sigma_minus_closed(const Params& p, double t);
/// Ergotropy from the closed-form <sz_B> and <sm_B>.
double tls_ergotropy_closed(const Params& p, double t);
/// Large-gamma form keeping only the three slow exponentials.
double tls_energy_large_gamma(const Params& p, double t);

struct SteadyValues {
  double energy;
  double ergotropy;
};
SteadyValues tls_steady(const Params& p);

/// The resonant two-TLS energy as an explicit sum of exponentials.
ExpSum tls_energy_terms(const Params& p);

double ho_energy_closed_resonant(const Params& p, double t);
ExpSum ho_energy_terms(const Params& p);
double ho_steady_energy(const Params& p);

enum class HoDetunedCase { DetunedDrive, DetunedCB };
double ho_closed_detuned(const Params& p, double t, HoDetunedCase c);
/// First peak of the detuned-drive closed-case energy, at t = pi/g for |delta| < g. Later
/// peaks can be higher; their sup is 4 F^2 g^2 / (delta^2 - g^2)^2.
double ho_detuned_drive_max(const Params& p);
/// Long-time slope of the dephased detuned-drive HO energy.
double ho_detuned_growth_rate(const Params& p);

enum class Regime { SmallGamma, LargeGammaWeakDrive, LargeGammaStrongDrive, HoSmallGamma, HoLargeGamma };

struct AsymptoticTime {
  double tau;
  bool regime_consistent;
};
AsymptoticTime charging_time_asymptotic(const Params& p, int n, Regime r);

enum class OptimalKind { TwoTLS, TwoHO };
double optimal_dephasing(const Params& p, OptimalKind kind);

}  // namespace qb
