#include "qbattery/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace qb {

const char* to_string(Scheme s) {
  return s == Scheme::MeasurementNonlinear ? "measurement" : "noise";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "measurement") return Scheme::MeasurementNonlinear;
  if (s == "noise") return Scheme::ClassicalNoiseLinear;
  throw ValidationError("scheme", "expected measurement or noise, got '" + s + "'");
}

void TrajectoryConfig::validate(const ModelSpec& m) const {
  if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt", "must be positive");
  if (n_traj < 1) throw ValidationError("n_traj", "must be at least 1");
  if (n_steps < 0) throw ValidationError("n_steps", "must be non-negative");
  if (dt * m.params.gamma_C > 0.05 + 1e-12)
    throw ValidationError("dt", "dt * gamma_C exceeds 0.05");
  const double hnorm = herm_eig(m.hamiltonian).eigenvalues.cwiseAbs().maxCoeff();
  if (dt * hnorm > 0.05 + 1e-12) throw ValidationError("dt", "dt * |H| exceeds 0.05");
}

ComplexVector sse_raw_step_measurement(const ComplexVector& psi, const ComplexMatrix& H,
                                       const ComplexMatrix& L, double gamma, double dt,
                                       double dW) {
  const ComplexVector Lpsi = L * psi;
  const double l = psi.dot(Lpsi).real() / psi.squaredNorm();
  const ComplexVector shifted = Lpsi - l * psi;  // (L - <L>) psi
  const ComplexVector shifted2 = L * shifted - l * shifted;
  return psi - cplx(0, dt) * (H * psi) - (0.5 * gamma * dt) * shifted2 +
         (std::sqrt(gamma) * dW) * shifted;
}

ComplexVector sse_raw_step_noise(const ComplexVector& psi, const ComplexMatrix& H,
                                 const ComplexMatrix& L, double gamma, double dt, double dW) {
  const ComplexVector Lpsi = L * psi;
  // Ito correction -gamma/2 L^2 from the Stratonovich noise term.
  return psi - cplx(0, dt) * (H * psi) - (0.5 * gamma * dt) * (L * Lpsi) -
         cplx(0, std::sqrt(gamma) * dW) * Lpsi;
}

ComplexVector sse_step_measurement(const ComplexVector& psi, const ModelSpec& m, double dt,
                                   double dW) {
  ComplexVector out =
      sse_raw_step_measurement(psi, m.hamiltonian, m.jump, m.params.gamma_C, dt, dW);
  return out / out.norm();
}

ComplexVector sse_step_noise(const ComplexVector& psi, const ModelSpec& m, double dt, double dW) {
  ComplexVector out = sse_raw_step_noise(psi, m.hamiltonian, m.jump, m.params.gamma_C, dt, dW);
  return out / out.norm();
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  // QB_THREADS caps whatever was asked for.
  if (const char* env = std::getenv("QB_THREADS"))
    if (const int cap = std::atoi(env); cap > 0) n = std::min(n, cap);
  return std::max(1, n);
}

TimeSeries ensemble_run(const ModelSpec& m, const TrajectoryConfig& cfg,
                        const std::vector<double>& t_grid,
                        const std::vector<std::pair<std::string, ComplexMatrix>>& observables) {
  cfg.validate(m);
  if (t_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty time grid");
  std::vector<long> steps_at(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double k = std::round(t_grid[i] / cfg.dt);
    if (t_grid[i] < 0 || std::abs(k * cfg.dt - t_grid[i]) > 1e-9 * std::max(1.0, t_grid[i]))
      throw Error(ErrorKind::InvalidArgument, "grid times must be non-negative multiples of dt");
    steps_at[i] = static_cast<long>(k);
    if (i > 0 && steps_at[i] <= steps_at[i - 1])
      throw Error(ErrorKind::InvalidArgument, "time grid not increasing");
  }
  const long n_steps = cfg.n_steps > 0 ? cfg.n_steps : steps_at.back();
  if (n_steps < steps_at.back())
    throw ValidationError("n_steps", "too few steps to reach the last grid time");

  std::vector<std::pair<std::string, ComplexMatrix>> ops;
  ops.emplace_back("energy", kron(identity(m.charger_dim()), m.battery_h));
  for (const auto& o : observables) {
    if (o.second.rows() != m.dim() || o.second.cols() != m.dim())
      throw Error(ErrorKind::DimMismatch, "observable '" + o.first + "' has the wrong dimension");
    ops.push_back(o);
  }
  const std::size_t n_obs = ops.size(), n_t = t_grid.size();
  const std::size_t stride = n_t * (n_obs + 1);  // observables then raw norm

  const ComplexMatrix& H = m.hamiltonian;
  const ComplexMatrix& L = m.jump;
  const double gamma = m.params.gamma_C, dt = cfg.dt, sdt = std::sqrt(dt);
  const ComplexVector psi0 = initial_vector(m);

  std::vector<double> samples(static_cast<std::size_t>(cfg.n_traj) * stride);
  auto run_one = [&](int traj) {
    std::mt19937_64 rng = trajectory_rng(cfg.seed, static_cast<std::uint64_t>(traj));
    std::normal_distribution<double> normal(0.0, 1.0);
    double* out = samples.data() + static_cast<std::size_t>(traj) * stride;
    ComplexVector psi = psi0;
    double raw_norm = 1.0;
    std::size_t next = 0;
    for (long k = 0;; ++k) {
      while (next < n_t && steps_at[next] == k) {
        for (std::size_t j = 0; j < n_obs; ++j) out[next * (n_obs + 1) + j] = psi.dot(ops[j].second * psi).real();
        out[next * (n_obs + 1) + n_obs] = raw_norm;
        ++next;
      }
      if (k == n_steps || next == n_t) break;
      const double dW = sdt * normal(rng);
      psi = cfg.scheme == Scheme::MeasurementNonlinear
                ? sse_raw_step_measurement(psi, H, L, gamma, dt, dW)
                : sse_raw_step_noise(psi, H, L, gamma, dt, dW);
      raw_norm = psi.squaredNorm();
      if (!std::isfinite(raw_norm) || raw_norm > 1e3)
        throw Error(ErrorKind::Unstable, "trajectory " + std::to_string(traj) +
                                             " norm diverged at t=" + std::to_string((k + 1) * dt));
      if (cfg.renormalize) psi /= std::sqrt(raw_norm);
    }
  };

  const int workers = std::min(worker_count(cfg.threads), cfg.n_traj);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int w) {
    try {
      for (int traj = w; traj < cfg.n_traj; traj += workers) run_one(traj);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1 || cfg.n_traj <= 100) {
    work(0);
    for (int w = 1; w < workers; ++w) work(w);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  TimeSeries ts;
  ts.times = t_grid;
  std::vector<std::string> names;
  for (const auto& o : ops) names.push_back(o.first);
  names.push_back("norm");
  for (const auto& n : names) {
    ts.add(n).resize(n_t);
    ts.add(n + "_se").resize(n_t);
  }
  const double N = cfg.n_traj;
  for (std::size_t i = 0; i < n_t; ++i)
    for (std::size_t j = 0; j <= n_obs; ++j) {
      double s = 0, s2 = 0;
      for (int traj = 0; traj < cfg.n_traj; ++traj) {
        const double x = samples[traj * stride + i * (n_obs + 1) + j];
        s += x;
        s2 += x * x;
      }
      const double mean = s / N;
      const double var = cfg.n_traj > 1 ? std::max(0.0, (s2 - N * mean * mean) / (N - 1)) : 0.0;
      ts.columns[2 * j][i] = mean;
      ts.columns[2 * j + 1][i] = std::sqrt(var / N);
    }
  ts.metadata.emplace_back("scheme", to_string(cfg.scheme));
  ts.metadata.emplace_back("dt", std::to_string(cfg.dt));
  ts.metadata.emplace_back("n_traj", std::to_string(cfg.n_traj));
  ts.metadata.emplace_back("seed", std::to_string(cfg.seed));
  ts.metadata.emplace_back("renormalized_each_step", cfg.renormalize ? "true" : "false");
  return ts;
}

}  // namespace qb
