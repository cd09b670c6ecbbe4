#include "qbattery/models.hpp"

#include <cmath>

namespace qb {

void Params::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
  };
  check(omega_B, "omega_B");
  check(delta_Cd, "delta_Cd");
  check(delta_Bd, "delta_Bd");
  check(g, "g");
  check(F, "F");
  check(gamma_C, "gamma_C");
  if (omega_B <= 0) throw ValidationError("omega_B", "must be positive");
  if (g < 0) throw ValidationError("g", "must be >= 0");
  if (F < 0) throw ValidationError("F", "must be >= 0");
  if (gamma_C < 0) throw ValidationError("gamma_C", "must be >= 0");
}

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::TwoTLS: return "two_tls";
    case ModelKind::TwoHO: return "two_ho";
    case ModelKind::TlsHo: return "tls_ho";
    case ModelKind::StarTLS: return "star_tls";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "two_tls") return ModelKind::TwoTLS;
  if (s == "two_ho") return ModelKind::TwoHO;
  if (s == "tls_ho") return ModelKind::TlsHo;
  if (s == "star_tls") return ModelKind::StarTLS;
  throw ValidationError("model", "unknown model '" + s + "'");
}

namespace {

// Shared assembly: charger lowering c, battery lowering b (full-space operators).
ModelSpec assemble(const Params& p, const ComplexMatrix& c, const ComplexMatrix& b,
                   const ComplexMatrix& jump, bool drive) {
  ModelSpec m;
  ComplexMatrix cn = c.adjoint() * c;
  ComplexMatrix bn = b.adjoint() * b;
  m.charger_h = p.delta_Cd * cn;
  m.hamiltonian = m.charger_h + p.delta_Bd * bn + p.g * (c.adjoint() * b + b.adjoint() * c);
  if (drive) m.hamiltonian += p.F * (c + c.adjoint());
  m.jump = jump;
  m.params = p;
  return m;
}

void require_displaceable(const Params& p) {
  if (!p.resonant())
    throw Error(ErrorKind::RequiresResonance, "displaced frame needs zero detunings");
  if (p.g <= 0) throw ValidationError("g", "displaced frame needs g > 0");
}

}  // namespace

ModelSpec build_two_tls(const Params& p) {
  p.validate();
  const std::vector<int> dims{2, 2};
  ModelSpec m = assemble(p, embed(sigma_minus(), dims, 0), embed(sigma_minus(), dims, 1),
                         embed(sigma_plus() * sigma_minus(), dims, 0), true);
  m.battery_h = p.omega_B * sigma_plus() * sigma_minus();
  m.dims = dims;
  m.kind = ModelKind::TwoTLS;
  return m;
}

ModelSpec build_two_ho(const Params& p, int cutoff, Frame frame) {
  p.validate();
  if (cutoff < 2) throw Error(ErrorKind::CutoffTooSmall, "two-HO cutoff must be >= 2");
  const std::vector<int> dims{cutoff, cutoff};
  const ComplexMatrix a = destroy(cutoff);
  ComplexMatrix b = embed(a, dims, 1);
  ModelSpec m;
  if (frame == Frame::Displaced) {
    require_displaceable(p);
    m = assemble(p, embed(a, dims, 0), b, embed(number(cutoff), dims, 0), false);
    m.displacement = p.F / p.g;
    ComplexMatrix shifted = a - m.displacement * identity(cutoff);
    m.battery_h = p.omega_B * shifted.adjoint() * shifted;
  } else {
    m = assemble(p, embed(a, dims, 0), b, embed(number(cutoff), dims, 0), true);
    m.battery_h = p.omega_B * number(cutoff);
  }
  m.dims = dims;
  m.kind = ModelKind::TwoHO;
  m.cutoff = cutoff;
  m.frame = frame;
  return m;
}

ModelSpec build_tls_ho(const Params& p, int cutoff, Frame frame) {
  p.validate();
  if (cutoff < 2) throw Error(ErrorKind::CutoffTooSmall, "TLS-HO cutoff must be >= 2");
  const std::vector<int> dims{2, cutoff};
  const ComplexMatrix a = destroy(cutoff);
  ModelSpec m;
  const ComplexMatrix c = embed(sigma_minus(), dims, 0);
  const ComplexMatrix jump = embed(sigma_plus() * sigma_minus(), dims, 0);
  if (frame == Frame::Displaced) {
    require_displaceable(p);
    m = assemble(p, c, embed(a, dims, 1), jump, false);
    m.displacement = p.F / p.g;
    ComplexMatrix shifted = a - m.displacement * identity(cutoff);
    m.battery_h = p.omega_B * shifted.adjoint() * shifted;
  } else {
    m = assemble(p, c, embed(a, dims, 1), jump, true);
    m.battery_h = p.omega_B * number(cutoff);
  }
  m.dims = dims;
  m.kind = ModelKind::TlsHo;
  m.cutoff = cutoff;
  m.frame = frame;
  return m;
}

ModelSpec build_star_tls(const Params& p, int n_batteries) {
  p.validate();
  if (n_batteries < 1) throw ValidationError("n_batteries", "must be >= 1");
  if (n_batteries > 6) throw Error(ErrorKind::TooManyBatteries, "at most 6 batteries supported");
  std::vector<int> dims(n_batteries + 1, 2);
  ModelSpec m;
  const ComplexMatrix c = embed(sigma_minus(), dims, 0);
  const ComplexMatrix cn = c.adjoint() * c;
  m.charger_h = p.delta_Cd * cn;
  m.hamiltonian = m.charger_h + p.F * (c + c.adjoint());
  ComplexMatrix hb = ComplexMatrix::Zero(1 << n_batteries, 1 << n_batteries);
  std::vector<int> bdims(n_batteries, 2);
  for (int j = 1; j <= n_batteries; ++j) {
    ComplexMatrix b = embed(sigma_minus(), dims, j);
    m.hamiltonian += p.delta_Bd * b.adjoint() * b + p.g * (c.adjoint() * b + b.adjoint() * c);
    hb += embed(sigma_plus() * sigma_minus(), bdims, j - 1);
  }
  m.jump = cn;
  m.battery_h = p.omega_B * hb;
  m.dims = dims;
  m.params = p;
  m.kind = n_batteries == 1 ? ModelKind::TwoTLS : ModelKind::StarTLS;
  m.n_batteries = n_batteries;
  return m;
}

int default_cutoff(const Params& p) {
  const double r = p.g > 0 ? p.F / p.g : 0.0;
  return std::max(2, 2 + static_cast<int>(std::ceil(8 * r * r + 6 * r)));
}

ComplexVector initial_vector(const ModelSpec& m) {
  // Ground states: TLS index 1, Fock index 0.
  ComplexVector psi = ComplexVector::Ones(1);
  for (std::size_t i = 0; i < m.dims.size(); ++i) {
    const int d = m.dims[i];
    ComplexVector f = ComplexVector::Zero(d);
    const bool is_tls = (i == 0 && m.kind != ModelKind::TwoHO) ||
                        (i > 0 && (m.kind == ModelKind::TwoTLS || m.kind == ModelKind::StarTLS));
    if (is_tls)
      f(1) = 1.0;
    else if (i > 0 && m.frame == Frame::Displaced)
      f = coherent(d, m.displacement);
    else
      f(0) = 1.0;
    psi = kron(psi, f);
  }
  return psi;
}

ComplexMatrix initial_state(const ModelSpec& m) { return projector(initial_vector(m)); }

ComplexMatrix battery_state(const ModelSpec& m, const ComplexMatrix& rho) {
  return partial_trace(rho, {m.charger_dim(), m.battery_dim()}, 1);
}

double fock_tail_population(const ModelSpec& m, const ComplexMatrix& rho) {
  if (m.cutoff == 0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dims.size(); ++i) {
    const bool is_ho = (m.kind == ModelKind::TwoHO) || (m.kind == ModelKind::TlsHo && i == 1);
    if (!is_ho) continue;
    ComplexMatrix r = partial_trace(rho, m.dims, static_cast<int>(i));
    const int d = m.dims[i];
    worst = std::max(worst, r(d - 1, d - 1).real() + r(d - 2, d - 2).real());
  }
  return worst;
}

void check_cutoff(const ModelSpec& m, const ComplexMatrix& rho, double tol) {
  const double tail = fock_tail_population(m, rho);
  if (tail >= tol)
    throw Error(ErrorKind::CutoffTooSmall, "top Fock levels hold population " +
                                               std::to_string(tail) + " at cutoff " +
                                               std::to_string(m.cutoff));
}

}  // namespace qb
