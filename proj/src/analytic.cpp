#include "qbattery/analytic.hpp"

#include <cmath>

namespace qb {

namespace {

void require_resonance(const Params& p, const char* what) {
  if (!p.resonant()) throw Error(ErrorKind::RequiresResonance, what);
  if (!(p.g > 0)) throw ValidationError("g", "closed forms need g > 0");
}

// cosh(sqrt z) and sinh(sqrt z)/sqrt z near z = 0.
void even_series(double z, double& c, double& s) {
  c = 1.0;
  s = 1.0;
  double tc = 1.0, tsn = 1.0;
  for (int k = 1; k <= 6; ++k) {
    tc *= z / ((2.0 * k - 1) * (2.0 * k));
    tsn *= z / ((2.0 * k) * (2.0 * k + 1));
    c += tc;
    s += tsn;
  }
}

}  // namespace

double damped_kernel(double gamma, double k2, double t) {
  const double q = gamma * t / 4;
  const double z = k2 * t * t;
  if (std::abs(z) < 1e-3) {
    double c, s;
    even_series(z, c, s);
    return std::exp(-q) * (c + q * s);
  }
  if (z > 0) {
    const double kt = std::sqrt(z);
    return 0.5 * ((1 + q / kt) * std::exp(kt - q) + (1 - q / kt) * std::exp(-kt - q));
  }
  const double w = std::sqrt(-z);
  return std::exp(-q) * (std::cos(w) + q * std::sin(w) / w);
}

double damped_chi(const ChiArgs& a, double t) {
  return damped_kernel(a.gamma_C, (a.gamma_C * a.gamma_C - 32 * a.f * a.g * a.g) / 16, t);
}

double chi(const ChiArgs& a, double t) {
  const double k2 = (a.gamma_C * a.gamma_C - 32 * a.f * a.g * a.g) / 16;
  const double z = k2 * t * t, q = a.gamma_C * t / 4;
  double c, s;
  if (std::abs(z) < 1e-3) {
    even_series(z, c, s);
  } else if (z > 0) {
    const double kt = std::sqrt(z);
    c = std::cosh(kt);
    s = std::sinh(kt) / kt;
  } else {
    const double w = std::sqrt(-z);
    c = std::cos(w);
    s = std::sin(w) / w;
  }
  return c + q * s;
}

TlsBranches tls_branches(double r) {
  const double s = std::sqrt(1 + 4 * r * r);
  TlsBranches b{};
  b.f[0] = 0.5;
  b.f[1] = 4 * r * r * r * r / (1 + 2 * r * r + s);  // = 1 + 2r^2 - s without cancellation
  b.f[2] = 1 + 2 * r * r + s;
  b.c[0] = 8 * r * r;
  b.c[1] = 1 + s;
  b.c[2] = 1 - s;
  return b;
}

double tls_energy_closed(const Params& p, double t) {
  require_resonance(p, "closed-form two-TLS energy needs resonance");
  const double r = p.F / p.g;
  const TlsBranches b = tls_branches(r);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += b.c[i] * damped_chi({p.gamma_C, p.g, b.f[i]}, t);
  return p.omega_B * (0.5 - sum / (4 * (1 + 4 * r * r)));
}

cplx tls_sigma_minus_closed(const Params& p, double t) {
  require_resonance(p, "closed-form <sm_B> needs resonance");
  const double r = p.F / p.g;
  const double x_ss = -r / (1 + 4 * r * r);
  const double k2 = (p.gamma_C * p.gamma_C - 16 * (p.g * p.g + 4 * p.F * p.F)) / 16;
  return {x_ss * (1 - damped_kernel(p.gamma_C, k2, t)), 0.0};
}

ExpSum tls_energy_terms(const Params& p) {
  require_resonance(p, "closed-form two-TLS energy needs resonance");
  const double r = p.F / p.g;
  const TlsBranches b = tls_branches(r);
  ExpSum e;
  e.offset = 0.5 * p.omega_B;
  for (int i = 0; i < 3; ++i) {
    const double k2 = (p.gamma_C * p.gamma_C - 32 * b.f[i] * p.g * p.g) / 16;
    e.append(damped_kernel_terms(p.gamma_C, k2), -p.omega_B * b.c[i] / (4 * (1 + 4 * r * r)));
  }
  e.simplify(0.0);
  return e;
}

double tls_ergotropy_closed(const Params& p, double t) {
  const double sz = 2 * tls_energy_closed(p, t) / p.omega_B - 1;
  const double sm = std::abs(tls_sigma_minus_closed(p, t));
  return 0.5 * p.omega_B * (std::sqrt(sz * sz + 4 * sm * sm) + sz);
}

double tls_energy_large_gamma(const Params& p, double t) {
  require_resonance(p, "large-gamma two-TLS energy needs resonance");
  const double r = p.F / p.g;
  const TlsBranches b = tls_branches(r);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    sum += b.c[i] * std::exp(-4 * p.g * p.g * b.f[i] * t / p.gamma_C);
  return p.omega_B * (0.5 - sum / (4 * (1 + 4 * r * r)));
}

SteadyValues tls_steady(const Params& p) {
  p.validate();
  if (!(p.gamma_C > 0)) throw Error(ErrorKind::InvalidArgument, "steady values need gamma_C > 0");
  if (!(p.g > 0)) throw ValidationError("g", "steady values need g > 0");
  if (p.delta_Bd == 0.0) {
    const double r = p.F / p.g;
    return {p.omega_B / 2, p.omega_B * r / (1 + 4 * r * r)};
  }
  if (p.delta_Bd == p.delta_Cd) return {p.omega_B / 2, 0.0};
  throw Error(ErrorKind::RequiresResonance,
              "steady values known for resonance, charger-battery detuning or detuned drive");
}

double ho_energy_closed_resonant(const Params& p, double t) {
  require_resonance(p, "closed-form HO energy needs resonance");
  const double r = p.F / p.g, gm = p.gamma_C, g2 = p.g * p.g;
  const double k1 = damped_kernel(gm, (gm * gm - 16 * g2) / 16, t);
  const double k2 = damped_kernel(gm, (gm * gm - 64 * g2) / 16, t);
  return p.omega_B * r * r * (1.5 - 0.5 * (4 * k1 - k2));
}

ExpSum ho_energy_terms(const Params& p) {
  require_resonance(p, "closed-form HO energy needs resonance");
  const double r = p.F / p.g, gm = p.gamma_C, g2 = p.g * p.g;
  ExpSum e;
  e.offset = 1.5 * p.omega_B * r * r;
  e.append(damped_kernel_terms(gm, (gm * gm - 16 * g2) / 16), -2 * p.omega_B * r * r);
  e.append(damped_kernel_terms(gm, (gm * gm - 64 * g2) / 16), 0.5 * p.omega_B * r * r);
  e.simplify(0.0);
  return e;
}

double ho_steady_energy(const Params& p) {
  if (!(p.g > 0)) throw ValidationError("g", "needs g > 0");
  const double r = p.F / p.g;
  return 1.5 * r * r * p.omega_B;
}

double ho_closed_detuned(const Params& p, double t, HoDetunedCase c) {
  p.validate();
  if (p.gamma_C != 0.0) throw Error(ErrorKind::InvalidArgument, "closed case needs gamma_C = 0");
  if (!(p.g > 0)) throw ValidationError("g", "needs g > 0");
  const double g = p.g, F = p.F;
  if (c == HoDetunedCase::DetunedDrive) {
    if (p.delta_Bd != p.delta_Cd)
      throw Error(ErrorKind::InvalidArgument, "detuned drive needs delta_Cd = delta_Bd");
    const double d = p.delta_Cd;
    if (std::abs(std::abs(d) - g) < 1e-9)
      throw Error(ErrorKind::OnResonancePole, "|delta_Cd| = g");
    const double den = d * d - g * g;
    const double sg = std::sin(g * t);
    const double bracket = 3 * g * g + g * g * std::cos(2 * g * t) -
                           4 * g * g * std::cos(g * t) * std::cos(d * t) +
                           2 * sg * d * (d * sg - 2 * g * std::sin(d * t));
    return p.omega_B * F * F / (2 * den * den) * bracket;
  }
  if (p.delta_Bd != 0.0)
    throw Error(ErrorKind::InvalidArgument, "charger-battery detuning needs delta_Bd = 0");
  const double d = p.delta_Cd, r = F / g;
  const double s = std::sqrt(d * d + 4 * g * g);
  const double hi = 0.5 * (d + s);  // normal-mode frequencies hi and g^2/hi
  const double lo = g * g / hi;
  const double e = 2 - 2 * g * g / (s * s) + 2 * g * g * std::cos(s * t) / (s * s) -
                   (std::cos(lo * t) + std::cos(hi * t)) -
                   d / s * (std::cos(lo * t) - std::cos(hi * t));
  return p.omega_B * r * r * e;
}

double ho_detuned_drive_max(const Params& p) {
  const double g = p.g, d = p.delta_Cd;
  if (std::abs(std::abs(d) - g) < 1e-9) throw Error(ErrorKind::OnResonancePole, "|delta_Cd| = g");
  const double den = d * d - g * g;
  const double c = std::cos(d * M_PI / (2 * g));
  return p.omega_B * 4 * p.F * p.F * g * g / (den * den) * c * c;
}

double ho_detuned_growth_rate(const Params& p) {
  const double g = p.g, d = p.delta_Cd, gm = p.gamma_C;
  const double den = 4 * std::pow(g, 4) - 8 * g * g * d * d + gm * gm * d * d + 4 * std::pow(d, 4);
  return p.omega_B * 2 * p.F * p.F * gm * d * d / den;
}

AsymptoticTime charging_time_asymptotic(const Params& p, int n, Regime r) {
  const double g = p.g, F = p.F, gm = p.gamma_C;
  if (!(gm > 0)) throw Error(ErrorKind::InvalidArgument, "asymptotic charging time needs gamma_C > 0");
  const double ratio = g > 0 ? F / g : INFINITY;
  switch (r) {
    case Regime::SmallGamma:
      return {4.0 * n / gm, gm <= 0.1 * g};
    case Regime::LargeGammaWeakDrive:
      return {n * g * g * gm / std::pow(F, 4), ratio <= 0.2 && gm >= 10 * g};
    case Regime::LargeGammaStrongDrive:
      return {n * gm / (2 * g * g), ratio >= 5 && gm >= 10 * g};
    case Regime::HoSmallGamma:
      return {4.0 / gm * n, gm <= 0.4 * g};
    case Regime::HoLargeGamma:
      return {n * gm / (2 * g * g), gm >= 40 * g};
  }
  return {0.0, false};
}

double optimal_dephasing(const Params& p, OptimalKind kind) {
  const double g = p.g;
  if (kind == OptimalKind::TwoHO) return 4 * g;
  const double r = p.F / g;
  if (r <= 0.2) return 8 * p.F * p.F / g;
  if (r >= 5) return 4 * g;
  const TlsBranches b = tls_branches(r);
  const int dom = std::abs(b.c[1]) >= std::abs(b.c[0]) ? 1 : 0;
  return std::sqrt(32 * b.f[dom]) * g;
}

}  // namespace qb
