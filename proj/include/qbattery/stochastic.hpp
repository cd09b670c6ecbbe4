#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qbattery/models.hpp"
#include "qbattery/timeseries.hpp"

namespace qb {

enum class Scheme { MeasurementNonlinear, ClassicalNoiseLinear };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct TrajectoryConfig {
  double dt = 1e-3;
  long n_steps = 0;  // 0 = just enough to reach the last grid time
  int n_traj = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::MeasurementNonlinear;
  bool renormalize = true;
  int threads = 0;  // 0 = QB_THREADS or hardware concurrency

  // dt * gamma <= 0.05 and dt * ||H|| <= 0.05, n_traj >= 1.
  void validate(const ModelSpec& m) const;
  bool operator==(const TrajectoryConfig&) const = default;
};

/// One Euler-Maruyama step of the continuous-measurement SSE, renormalized.
ComplexVector sse_step_measurement(const ComplexVector& psi, const ModelSpec& m, double dt,
                                   double dW);
/// One Euler-Maruyama step of the classical-noise linear SSE (Ito form), renormalized.
ComplexVector sse_step_noise(const ComplexVector& psi, const ModelSpec& m, double dt, double dW);

/// Unnormalized steps, for the martingale check and the stability guard.
ComplexVector sse_raw_step_measurement(const ComplexVector& psi, const ComplexMatrix& H,
                                       const ComplexMatrix& L, double gamma, double dt, double dW);
ComplexVector sse_raw_step_noise(const ComplexVector& psi, const ComplexMatrix& H,
                                 const ComplexMatrix& L, double gamma, double dt, double dW);

/// Generator for trajectory `index` of a run seeded with `seed`.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index);

/// Requested worker count (0 = hardware), capped by QB_THREADS.
int worker_count(int requested = 0);

/// Ensemble means over trajectories started in the model ground state. Every recorded
/// column `x` gets a companion `x_se` with the standard error of the mean; `norm` holds the
/// mean squared norm before renormalization.
TimeSeries ensemble_run(const ModelSpec& m, const TrajectoryConfig& cfg,
                        const std::vector<double>& t_grid,
                        const std::vector<std::pair<std::string, ComplexMatrix>>& observables = {});

}  // namespace qb
