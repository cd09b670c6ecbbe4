#pragma once

#include <string>
#include <vector>

#include "qbattery/opalg.hpp"

namespace qb {

/// Model parameters in units of omega_B (hbar = 1).
struct Params {
  double omega_B = 1.0;
  double delta_Cd = 0.0;  // omega_C - omega_d
  double delta_Bd = 0.0;  // omega_B - omega_d
  double g = 1.0;
  double F = 0.0;
  double gamma_C = 0.0;

  double delta_CB() const { return delta_Cd - delta_Bd; }
  bool resonant() const { return delta_Cd == 0.0 && delta_Bd == 0.0; }
  void validate() const;
  bool operator==(const Params&) const = default;
};

enum class ModelKind { TwoTLS, TwoHO, TlsHo, StarTLS };
enum class Frame { Rotating, Displaced };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ComplexMatrix hamiltonian;  // rotating-frame H
  ComplexMatrix jump;         // L_C (x) I_B
  ComplexMatrix charger_h;    // bare charger term of H, full space
  ComplexMatrix battery_h;    // H_B on the battery factor
  std::vector<int> dims;      // charger first, then battery factors
  Params params;
  ModelKind kind = ModelKind::TwoTLS;
  int n_batteries = 1;
  int cutoff = 0;  // Fock cutoff of the HO factors, 0 if none
  Frame frame = Frame::Rotating;
  double displacement = 0.0;  // battery displacement F/g in the displaced frame

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
  int charger_dim() const { return dims.front(); }
  int battery_dim() const { return dim() / dims.front(); }
};

ModelSpec build_two_tls(const Params& p);
ModelSpec build_two_ho(const Params& p, int cutoff, Frame frame = Frame::Rotating);
ModelSpec build_tls_ho(const Params& p, int cutoff, Frame frame = Frame::Rotating);
ModelSpec build_star_tls(const Params& p, int n_batteries);

/// Smallest cutoff >= 2 + ceil(8 (F/g)^2 + 6 F/g).
int default_cutoff(const Params& p);

/// Charger and battery in their free ground states, expressed in the model frame.
ComplexMatrix initial_state(const ModelSpec& m);
ComplexVector initial_vector(const ModelSpec& m);

/// Tr_C[rho].
ComplexMatrix battery_state(const ModelSpec& m, const ComplexMatrix& rho);

/// Largest population in the top two Fock levels over all HO factors (0 for TLS models).
double fock_tail_population(const ModelSpec& m, const ComplexMatrix& rho);
void check_cutoff(const ModelSpec& m, const ComplexMatrix& rho, double tol = 1e-8);

}  // namespace qb
