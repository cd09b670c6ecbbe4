#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbattery/expsum.hpp"
#include "qbattery/models.hpp"
#include "qbattery/timeseries.hpp"

namespace qb {

/// -i[H, rho] + gamma (L rho L - {L^2, rho}/2).
ComplexMatrix liouvillian_apply(const ComplexMatrix& H, const ComplexMatrix& L, double gamma,
                                const ComplexMatrix& rho);
ComplexMatrix liouvillian_apply(const ModelSpec& model, const ComplexMatrix& rho);

/// Dense superoperator acting on row-major vec(rho).
ComplexMatrix liouvillian_matrix(const ModelSpec& model);

/// Connected components of the sparsity graph of H and L; each is invariant under both.
struct Sectors {
  std::vector<std::vector<int>> members;
  std::vector<int> sector_of;
};
Sectors hilbert_sectors(const ComplexMatrix& H, const ComplexMatrix& L);

enum class Method { Auto, Adaptive, Exact };

struct IntegrateOptions {
  Method method = Method::Auto;
  double rtol = 1e-9;
  double atol = 1e-11;
  bool energy = true;
  bool ergotropy = false;
  bool entropy = false;
  bool store_states = false;
  bool check_invariants = true;
  // Extra full-space observables, recorded as Re Tr[rho O].
  std::vector<std::pair<std::string, ComplexMatrix>> observables;
  // Exact propagation is used when every Liouvillian block fits this size.
  int exact_block_limit = 256;
};

TimeSeries integrate(const ModelSpec& model, const ComplexMatrix& rho0,
                     const std::vector<double>& t_grid, const IntegrateOptions& opt = {});

/// Re Tr[rho(t) op] as a sum of exponentials, assembled sector by sector.
ExpSum observable_terms(const ModelSpec& model, const ComplexMatrix& rho0, const ComplexMatrix& op);

/// State at a single time.
ComplexMatrix propagate(const ModelSpec& model, const ComplexMatrix& rho0, double t,
                        const IntegrateOptions& opt = {});

struct SteadyStateOptions {
  bool strict = false;         // throw DegenerateSteadyState instead of falling back
  double null_tol = 1e-9;      // singular values below null_tol * max(1, |L|) count as null
  double fallback_time = 0.0;  // 0 = automatic
  double converge_tol = 1e-10;
  int max_extensions = 12;
  int null_space_block_limit = 1600;
};

struct SteadyStateInfo {
  int null_dim = -1;  // -1 when the null space was not computed
  bool fallback = false;
  double time = 0.0;  // propagation time used by the fallback
};

ComplexMatrix steady_state(const ModelSpec& model, const SteadyStateOptions& opt = {},
                           SteadyStateInfo* info = nullptr);

/// Default long-time propagation span for the steady-state fallback.
double steady_fallback_time(const Params& p);

/// Outcome-averaged Gaussian POVM channel for measuring `jump` with strength gamma over dt.
ComplexMatrix povm_average_channel(const ComplexMatrix& rho, const ComplexMatrix& jump,
                                   double gamma, double dt);

}  // namespace qb
