#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbattery/expsum.hpp"
#include "qbattery/models.hpp"
#include "qbattery/timeseries.hpp"

namespace qb {

/// dV/dt = M V + W with V(0) = v0. Battery energy, when defined, is energy_weights . V + energy_offset.
struct MomentSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd inhomogeneity;
  Eigen::VectorXd v0;
  std::vector<std::string> labels;
  Eigen::VectorXd energy_weights;
  double energy_offset = 0.0;

  int dim() const { return static_cast<int>(v0.size()); }
  bool homogeneous() const { return inhomogeneity.isZero(0.0); }
  void validate() const;
};

/// Two-TLS rotating-frame systems. First: (<sz_B>, <sz_C>, Re/Im <sp_C sm_B>, Re/Im <sz_C sm_B>,
/// Re/Im <sm_C sm_B>, Re/Im <sm_C>). Second: (Re/Im <sm_B>, Re/Im <sm_C sz_B>, <sz_C sz_B>).
std::pair<MomentSystem, MomentSystem> tls_moment_systems(const Params& p);

/// Two-HO at resonance in the frame displaced by F/g: (a_C, a_B, n_C, <ad_C a_B>, n_B).
MomentSystem ho_resonant_moment_system(const Params& p);

/// Two-HO rotating frame with detunings: (n_B, n_C, Im/Re <ad_C a_B>, Re/Im a_B, Re/Im a_C).
MomentSystem ho_detuned_moment_system(const Params& p);

enum class MomentPath { Auto, Exponential, Ode };

/// Energy of a homogeneous system as a sum of exponentials.
ExpSum moment_energy_terms(const MomentSystem& sys);

/// Columns: one per label, plus "energy" when the system defines one.
TimeSeries evolve_moments(const MomentSystem& sys, const std::vector<double>& t_grid,
                          MomentPath path = MomentPath::Auto);

}  // namespace qb
