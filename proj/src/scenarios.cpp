#include "qbattery/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "qbattery/analytic.hpp"
#include "qbattery/lindblad.hpp"
#include "qbattery/moments.hpp"

namespace qb {

const char* to_string(Solver s) {
  switch (s) {
    case Solver::Lindblad: return "lindblad";
    case Solver::Moments: return "moments";
    case Solver::Analytic: return "analytic";
    case Solver::Stochastic: return "stochastic";
  }
  return "?";
}

const char* to_string(Task t) {
  switch (t) {
    case Task::Dynamics: return "dynamics";
    case Task::Charging: return "charging";
    case Task::Steady: return "steady";
    case Task::Detuning: return "detuning";
  }
  return "?";
}

Solver solver_from_string(const std::string& s) {
  for (Solver v : {Solver::Lindblad, Solver::Moments, Solver::Analytic, Solver::Stochastic})
    if (s == to_string(v)) return v;
  throw ValidationError("solver", "unknown solver '" + s + "'");
}

Task task_from_string(const std::string& s) {
  for (Task v : {Task::Dynamics, Task::Charging, Task::Steady, Task::Detuning})
    if (s == to_string(v)) return v;
  throw ValidationError("task", "unknown task '" + s + "'");
}

const std::vector<std::string>& sweep_variables() {
  static const std::vector<std::string> v{"F",        "g",        "gamma_C",    "delta_Cd",
                                          "delta_Bd", "delta_CB", "delta_drive", "F_over_g",
                                          "n_batteries"};
  return v;
}

Params with_variable(const Params& p, const std::string& name, double v) {
  Params q = p;
  if (name == "F")
    q.F = v;
  else if (name == "g")
    q.g = v;
  else if (name == "gamma_C")
    q.gamma_C = v;
  else if (name == "delta_Cd")
    q.delta_Cd = v;
  else if (name == "delta_Bd")
    q.delta_Bd = v;
  else if (name == "delta_CB")
    q.delta_Cd = q.delta_Bd + v;
  else if (name == "delta_drive")
    q.delta_Cd = q.delta_Bd = v;
  else if (name == "F_over_g")
    q.F = v * q.g;
  else if (name != "n_batteries")
    throw ValidationError("sweep", "unknown sweep variable '" + name + "'");
  return q;
}

namespace {

bool is_detuning(const std::string& v) {
  return v == "delta_Cd" || v == "delta_Bd" || v == "delta_CB" || v == "delta_drive";
}

// Runs f(i) for i in [0, n) on the worker pool; results stay in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(worker_count(), static_cast<int>(n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ComplexMatrix full_battery_h(const ModelSpec& m) {
  return kron(identity(m.charger_dim()), m.battery_h);
}

// Spectral sums fail on exactly defective generators; a relative nudge of gamma avoids them.
template <typename F>
ExpSum with_nudge(const Params& p, F&& build) {
  try {
    return build(p);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularMatrix) throw;
    Params q = p;
    q.gamma_C *= 1 + 1e-9;
    if (q.gamma_C == 0) q.g *= 1 + 1e-9;
    return build(q);
  }
}

}  // namespace

void Scenario::validate() const {
  params.validate();
  if (!(t_max > 0) || !std::isfinite(t_max)) throw ValidationError("t_max", "must be positive");
  if (!(dt > 0) || dt > t_max) throw ValidationError("dt", "must be positive and below t_max");
  if (n < 1) throw ValidationError("n", "must be at least 1");
  if (n_batteries < 1 || n_batteries > 6)
    throw ValidationError("n_batteries", "must be between 1 and 6");
  if (n_batteries > 1 && model != ModelKind::StarTLS)
    throw ValidationError("n_batteries", "only the star model has several batteries");
  if (cutoff < 0 || cutoff == 1) throw ValidationError("cutoff", "must be 0 (auto) or >= 2");
  if (solver == Solver::Moments && (model == ModelKind::TlsHo || model == ModelKind::StarTLS))
    throw ValidationError("solver", "no moment system for this model");
  if (solver == Solver::Analytic && model != ModelKind::TwoTLS && model != ModelKind::TwoHO)
    throw ValidationError("solver", "no closed form for this model");
  for (const auto& o : observables)
    if (o != "energy" && o != "ergotropy" && o != "entropy")
      throw ValidationError("observables", "unknown observable '" + o + "'");
  if (sweep) {
    const auto& vars = sweep_variables();
    if (std::find(vars.begin(), vars.end(), sweep->variable) == vars.end())
      throw ValidationError("sweep", "unknown sweep variable '" + sweep->variable + "'");
    if (sweep->values.empty()) throw ValidationError("sweep", "empty grid");
    const bool up = sweep->values.size() < 2 || sweep->values[1] > sweep->values[0];
    for (std::size_t i = 1; i < sweep->values.size(); ++i)
      if (up ? !(sweep->values[i] > sweep->values[i - 1]) : !(sweep->values[i] < sweep->values[i - 1]))
        throw ValidationError("sweep", "grid must be strictly monotone");
    if (sweep->variable == "n_batteries" && model != ModelKind::StarTLS)
      throw ValidationError("sweep", "n_batteries sweeps need the star model");
    for (double v : sweep->values) with_variable(params, sweep->variable, v).validate();
  }
  if (task == Task::Detuning && (!sweep || !is_detuning(sweep->variable)))
    throw ValidationError("sweep", "detuning task needs a detuning sweep");
  if (solver == Solver::Stochastic) trajectories.validate(scenario_model(*this, params));
}

ModelSpec scenario_model(const Scenario& s, const Params& p) {
  const bool displaced = p.resonant() && p.g > 0;
  const Frame frame = displaced ? Frame::Displaced : Frame::Rotating;
  const int cutoff = s.cutoff > 0 ? s.cutoff : default_cutoff(p);
  switch (s.model) {
    case ModelKind::TwoTLS: return build_two_tls(p);
    case ModelKind::TwoHO: return build_two_ho(p, cutoff, frame);
    case ModelKind::TlsHo: return build_tls_ho(p, cutoff, frame);
    case ModelKind::StarTLS: return build_star_tls(p, s.n_batteries);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model");
}

ExpSum energy_terms(const Scenario& s, const Params& p) {
  if (s.model == ModelKind::TwoTLS) {
    if (s.solver == Solver::Analytic || (p.resonant() && s.solver != Solver::Lindblad))
      return tls_energy_terms(p);
    if (s.solver == Solver::Moments)
      return with_nudge(p, [](const Params& q) { return moment_energy_terms(tls_moment_systems(q).first); });
  }
  if (s.model == ModelKind::TwoHO && p.resonant()) {
    if (s.solver == Solver::Analytic) return ho_energy_terms(p);
    if (s.solver == Solver::Moments)
      return with_nudge(p, [](const Params& q) { return moment_energy_terms(ho_resonant_moment_system(q)); });
  }
  return with_nudge(p, [&](const Params& q) {
    const ModelSpec m = scenario_model(s, q);
    return observable_terms(m, initial_state(m), full_battery_h(m));
  });
}

double steady_energy(const Scenario& s, const Params& p, const ExpSum& e) {
  // A truncated Lindblad model is measured against its own limit.
  if (s.solver != Solver::Lindblad && p.gamma_C > 0 && p.resonant() && p.g > 0) {
    if (s.model == ModelKind::TwoTLS) return 0.5 * p.omega_B;
    if (s.model == ModelKind::TwoHO) return ho_steady_energy(p);
  }
  return e.limit();
}

ChargingReport charging_report(const Scenario& s, const Params& p) {
  const ExpSum e = energy_terms(s, p);
  ChargingReport r = charging_time(e, steady_energy(s, p, e), s.n);
  r.gamma_C = p.gamma_C;
  return r;
}

SteadyReport steady_report(const Scenario& s, const Params& p) {
  const ModelSpec m = scenario_model(s, p);
  const ComplexMatrix rho = steady_state(m);
  const ComplexMatrix rb = battery_state(m, rho);
  return {energy(rb, m.battery_h), ergotropy(rb, m.battery_h)};
}

TransientMax closed_transient_max(const Scenario& s, const Params& p) {
  Params q = p;
  q.gamma_C = 0.0;
  const double g = p.g > 0 ? p.g : 1.0;
  std::function<double(double)> e;
  ExpSum sz, re, im;
  bool tls_battery = false;
  double min_gap = INFINITY;
  if (s.model == ModelKind::TwoHO) {
    // Closed forms; the driven oscillators stay in coherent states, so ergotropy = energy.
    const double d = q.delta_Cd;
    std::vector<double> freqs;
    if (q.resonant()) {
      e = [q](double t) { return ho_energy_closed_resonant(q, t); };
      freqs = {g};
    } else if (q.delta_Bd == 0.0) {
      e = [q](double t) { return ho_closed_detuned(q, t, HoDetunedCase::DetunedCB); };
      const double hi = 0.5 * (d + std::sqrt(d * d + 4 * g * g));
      freqs = {std::abs(hi), g * g / std::abs(hi)};
    } else if (q.delta_Bd == q.delta_Cd) {
      e = [q](double t) { return ho_closed_detuned(q, t, HoDetunedCase::DetunedDrive); };
      freqs = {g, std::abs(d), std::abs(g - std::abs(d))};
    } else {
      throw Error(ErrorKind::InvalidArgument, "closed HO case needs delta_Bd = 0 or delta_Bd = delta_Cd");
    }
    for (double f : freqs)
      if (f > 1e-9) min_gap = std::min(min_gap, f);
  } else {
    const ModelSpec m = scenario_model(s, q);
    const ComplexMatrix rho0 = initial_state(m);
    auto es = std::make_shared<ExpSum>(observable_terms(m, rho0, full_battery_h(m)));
    e = [es](double t) { return (*es)(t); };
    // TLS batteries: ergotropy from <sz> and |<sm>|.
    tls_battery = s.model == ModelKind::TwoTLS;
    if (tls_battery) {
      sz = observable_terms(m, rho0, embed(sigma_z(), m.dims, 1));
      re = observable_terms(m, rho0, embed(ComplexMatrix(0.5 * sigma_x()), m.dims, 1));
      const ComplexMatrix y = cplx(0, 0.5) * (sigma_plus() - sigma_minus());
      im = observable_terms(m, rho0, embed(y, m.dims, 1));
    }
    double amp_scale = 0.0;
    for (const auto& k : es->terms) amp_scale = std::max(amp_scale, std::abs(k.amp));
    for (const auto& k : es->terms)
      if (std::abs(k.amp) > 1e-8 * amp_scale && std::abs(k.rate.imag()) > 1e-9)
        min_gap = std::min(min_gap, std::abs(k.rate.imag()));
  }
  double window = 40.0 / g;
  if (std::isfinite(min_gap)) window = std::max(window, 2 * 2 * M_PI / min_gap);
  window = std::min(window, 5000.0 / g);

  auto erg = [&](double t) {
    const double a = re(t), b = im(t);
    return tls_ergotropy(sz(t), std::sqrt(a * a + b * b), p.omega_B);
  };
  auto refine = [&](const std::function<double(double)>& f, double centre, double h) {
    // Golden-section search for the maximum on [centre - h, centre + h].
    const double phi = 0.5 * (std::sqrt(5.0) - 1);
    double a = std::max(0.0, centre - h), b = std::min(window, centre + h);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, b); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = f(d);
      }
    }
    return std::max({f(0.5 * (a + b)), fc, fd, f(centre)});
  };
  const double step = 0.01 / g;
  const long n = static_cast<long>(std::ceil(window / step));
  double best_e = -INFINITY, best_t = 0, best_r = -INFINITY, best_rt = 0;
  for (long i = 0; i <= n; ++i) {
    const double t = std::min(window, i * step);
    const double v = e(t);
    if (v > best_e) best_e = v, best_t = t;
    if (tls_battery) {
      const double r = erg(t);
      if (r > best_r) best_r = r, best_rt = t;
    }
  }
  TransientMax out;
  out.energy = refine(e, best_t, step);
  out.ergotropy = tls_battery ? refine(erg, best_rt, step) : out.energy;
  out.time = best_t;
  out.window = window;
  return out;
}

namespace {

TimeSeries dynamics_moments(const Scenario& s, const Params& p, const std::vector<double>& grid) {
  TimeSeries out;
  out.times = grid;
  if (s.model == ModelKind::TwoTLS) {
    auto [s1, s2] = tls_moment_systems(p);
    const TimeSeries a = evolve_moments(s1, grid);
    const TimeSeries b = evolve_moments(s2, grid);
    for (const auto& o : s.observables) out.add(o);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = a.col("energy")[i];
      const double sz = a.col("<sz_B>")[i];
      const double x = b.col("Re<sm_B>")[i], y = b.col("Im<sm_B>")[i];
      const double r = tls_ergotropy(sz, std::sqrt(x * x + y * y), p.omega_B);
      for (const auto& o : s.observables) {
        if (o == "energy") out.col(o).push_back(e);
        if (o == "ergotropy") out.col(o).push_back(r);
        if (o == "entropy") out.col(o).push_back(tls_entropy_from_energy(e, r, p.omega_B));
      }
    }
    return out;
  }
  for (const auto& o : s.observables)
    if (o != "energy") throw ValidationError("observables", "HO moments give the energy only");
  const MomentSystem m = p.resonant() ? ho_resonant_moment_system(p) : ho_detuned_moment_system(p);
  const TimeSeries a = evolve_moments(m, grid);
  out.add("energy") = a.col("energy");
  out.warnings = a.warnings;
  return out;
}

TimeSeries dynamics_analytic(const Scenario& s, const Params& p, const std::vector<double>& grid) {
  TimeSeries out;
  out.times = grid;
  for (const auto& o : s.observables) {
    auto& c = out.add(o);
    for (double t : grid) {
      if (s.model == ModelKind::TwoTLS) {
        const double e = tls_energy_closed(p, t), r = tls_ergotropy_closed(p, t);
        c.push_back(o == "energy" ? e : o == "ergotropy" ? r : tls_entropy_from_energy(e, r, p.omega_B));
      } else {
        if (o != "energy") throw ValidationError("observables", "HO closed forms give the energy only");
        if (p.resonant())
          c.push_back(ho_energy_closed_resonant(p, t));
        else
          c.push_back(ho_closed_detuned(p, t, p.delta_Bd == 0.0 ? HoDetunedCase::DetunedCB
                                                                : HoDetunedCase::DetunedDrive));
      }
    }
  }
  return out;
}

}  // namespace

TimeSeries run_dynamics(const Scenario& s, const Params& p) {
  const std::vector<double> grid = uniform_grid(s.t_max, s.dt);
  switch (s.solver) {
    case Solver::Moments: return dynamics_moments(s, p, grid);
    case Solver::Analytic: return dynamics_analytic(s, p, grid);
    case Solver::Stochastic: {
      Scenario q = s;
      const ModelSpec m = scenario_model(s, p);
      // Output times must sit on the trajectory step lattice.
      std::vector<double> g2;
      const long stride = std::max(1L, std::lround(s.dt / s.trajectories.dt));
      for (long k = 0; k * stride * s.trajectories.dt <= s.t_max * (1 + 1e-12); ++k)
        g2.push_back(k * stride * s.trajectories.dt);
      TimeSeries ts = ensemble_run(m, s.trajectories, g2);
      TimeSeries out;
      out.times = ts.times;
      out.add("energy") = ts.col("energy");
      out.add("energy_se") = ts.col("energy_se");
      out.metadata = ts.metadata;
      return out;
    }
    case Solver::Lindblad: break;
  }
  const ModelSpec m = scenario_model(s, p);
  IntegrateOptions o;
  o.energy = o.ergotropy = o.entropy = false;
  for (const auto& name : s.observables) {
    if (name == "energy") o.energy = true;
    if (name == "ergotropy") o.ergotropy = true;
    if (name == "entropy") o.entropy = true;
  }
  o.store_states = m.cutoff > 0;
  TimeSeries ts = integrate(m, initial_state(m), grid, o);
  if (m.cutoff > 0) {
    double tail = 0.0;
    for (const auto& r : ts.states) tail = std::max(tail, fock_tail_population(m, r));
    if (tail > 1e-8)
      ts.warnings.push_back("Fock cutoff " + std::to_string(m.cutoff) +
                            " may be too small: tail population " + fmt(tail));
    ts.states.clear();
  }
  // Report only the requested columns, in the requested order.
  TimeSeries out;
  out.times = ts.times;
  for (const auto& name : s.observables) out.add(name) = ts.col(name);
  out.warnings = ts.warnings;
  return out;
}

Table to_table(const TimeSeries& ts, const std::string& name) {
  Table t;
  t.name = name;
  t.header.push_back("t");
  for (const auto& n : ts.names) t.header.push_back(n);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<double> row{ts.times[i]};
    for (const auto& c : ts.columns) row.push_back(c[i]);
    t.rows.push_back(std::move(row));
  }
  t.metadata = ts.metadata;
  t.warnings = ts.warnings;
  return t;
}

namespace {

void describe(const Scenario& s, Table& t) {
  t.metadata.emplace_back("scenario", s.name);
  t.metadata.emplace_back("task", to_string(s.task));
  t.metadata.emplace_back("model", to_string(s.model));
  t.metadata.emplace_back("solver", to_string(s.solver));
  t.metadata.emplace_back("F", fmt(s.params.F));
  t.metadata.emplace_back("g", fmt(s.params.g));
  t.metadata.emplace_back("gamma_C", fmt(s.params.gamma_C));
  t.metadata.emplace_back("delta_Cd", fmt(s.params.delta_Cd));
  t.metadata.emplace_back("delta_Bd", fmt(s.params.delta_Bd));
  if (s.model == ModelKind::StarTLS) t.metadata.emplace_back("n_batteries", std::to_string(s.n_batteries));
  if (s.task == Task::Charging) t.metadata.emplace_back("n", std::to_string(s.n));
  if (s.sweep) t.metadata.emplace_back("sweep", s.sweep->variable + " = " + s.sweep->grid);
}

Scenario at_point(const Scenario& s, double v) {
  Scenario q = s;
  q.params = with_variable(s.params, s.sweep->variable, v);
  if (s.sweep->variable == "n_batteries") q.n_batteries = static_cast<int>(std::lround(v));
  q.sweep.reset();
  return q;
}

std::vector<Table> dynamics_sweep(const Scenario& s) {
  const auto& vals = s.sweep->values;
  auto series = parallel_map<TimeSeries>(vals.size(), [&](std::size_t i) {
    const Scenario q = at_point(s, vals[i]);
    return run_dynamics(q, q.params);
  });
  std::vector<Table> out;
  std::vector<std::string> obs = series.front().names;
  for (const auto& o : obs) {
    Table t;
    t.name = o;
    t.header.push_back("t");
    for (double v : vals) t.header.push_back(s.sweep->variable + "=" + fmt(v));
    for (std::size_t k = 0; k < series.front().size(); ++k) {
      std::vector<double> row{series.front().times[k]};
      for (const auto& ts : series) row.push_back(ts.col(o)[k]);
      t.rows.push_back(std::move(row));
    }
    describe(s, t);
    for (const auto& ts : series)
      for (const auto& w : ts.warnings) t.warnings.push_back(w);
    out.push_back(std::move(t));
  }
  return out;
}

Table charging_table(const Scenario& s) {
  const std::vector<double> vals = s.sweep ? s.sweep->values : std::vector<double>{s.params.gamma_C};
  const std::string var = s.sweep ? s.sweep->variable : "gamma_C";
  struct Row {
    ChargingReport r;
    std::string warning;
  };
  auto rows = parallel_map<Row>(vals.size(), [&](std::size_t i) {
    const Scenario q = s.sweep ? at_point(s, vals[i]) : s;
    Row row;
    try {
      row.r = charging_report(q, q.params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotConverged) throw;
      row.r.tau = NAN;
      row.r.converged = false;
      row.r.n = s.n;
      row.r.gamma_C = q.params.gamma_C;
      row.warning = var + "=" + fmt(vals[i]) + ": " + e.what();
    }
    return row;
  });
  Table t;
  t.name = "charging";
  t.header = {var, "tau", "e_ss", "e_max_transient", "horizon", "converged"};
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto& r = rows[i].r;
    t.rows.push_back({vals[i], r.tau, r.e_ss, r.e_max_transient, r.horizon, r.converged ? 1.0 : 0.0});
    if (!rows[i].warning.empty()) t.warnings.push_back(rows[i].warning);
  }
  describe(s, t);
  return t;
}

Table steady_table(const Scenario& s) {
  const std::vector<double> vals = s.sweep ? s.sweep->values : std::vector<double>{s.params.F};
  const std::string var = s.sweep ? s.sweep->variable : "F";
  auto rows = parallel_map<SteadyReport>(vals.size(), [&](std::size_t i) {
    const Scenario q = s.sweep ? at_point(s, vals[i]) : s;
    return steady_report(q, q.params);
  });
  Table t;
  t.name = "steady";
  t.header = {var, "energy", "ergotropy", "ratio"};
  for (std::size_t i = 0; i < vals.size(); ++i)
    t.rows.push_back({vals[i], rows[i].energy, rows[i].ergotropy,
                      rows[i].energy > 0 ? rows[i].ergotropy / rows[i].energy : NAN});
  describe(s, t);
  return t;
}

}  // namespace

Table sweep_detuning(const Scenario& s) {
  if (!s.sweep || !is_detuning(s.sweep->variable))
    throw ValidationError("sweep", "detuning task needs a detuning sweep");
  const auto& vals = s.sweep->values;
  struct Row {
    TransientMax closed;
    double energy, ergotropy;
    std::string warning;
  };
  auto rows = parallel_map<Row>(vals.size(), [&](std::size_t i) {
    const Scenario q = at_point(s, vals[i]);
    Row row;
    row.closed = closed_transient_max(q, q.params);
    const bool drive_detuned = q.params.delta_Bd != 0.0 && q.params.delta_Bd == q.params.delta_Cd;
    if (!drive_detuned || q.model == ModelKind::TwoTLS) {
      const SteadyReport st = steady_report(q, q.params);
      row.energy = st.energy;
      row.ergotropy = st.ergotropy;
    }
    if (drive_detuned) {
      // Quasi-steady plateau: first time a sliding window of width 10/g varies by < 1e-3.
      Scenario d = q;
      d.observables = {"energy", "ergotropy"};
      d.dt = 0.1 / q.params.g;
      d.t_max = 4000.0 / q.params.g;
      if (d.solver != Solver::Moments && d.model == ModelKind::TwoTLS) d.solver = Solver::Moments;
      const TimeSeries ts = run_dynamics(d, q.params);
      const auto& r = ts.col("ergotropy");
      const auto& e = ts.col("energy");
      const std::size_t w = static_cast<std::size_t>(std::lround(10.0 / (q.params.g * d.dt)));
      bool found = false;
      for (std::size_t k = w; k < r.size(); ++k) {
        const auto [lo, hi] = std::minmax_element(r.begin() + (k - w), r.begin() + k + 1);
        const double scale = std::max(std::abs(r[k]), 1e-12);
        if ((*hi - *lo) / scale < 1e-3) {
          row.ergotropy = r[k];
          row.energy = e[k];
          found = true;
          break;
        }
      }
      if (!found) {
        row.ergotropy = r.back();
        row.energy = e.back();
        row.warning = s.sweep->variable + "=" + fmt(vals[i]) + ": no ergotropy plateau before t=" +
                      fmt(d.t_max);
      }
    }
    return row;
  });
  Table t;
  t.name = "detuning";
  t.header = {s.sweep->variable, "closed_energy_max", "closed_ergotropy_max", "dephased_energy",
              "dephased_ergotropy", "closed_window"};
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto& r = rows[i];
    t.rows.push_back({vals[i], r.closed.energy, r.closed.ergotropy, r.energy, r.ergotropy,
                      r.closed.window});
    if (!r.warning.empty()) t.warnings.push_back(r.warning);
  }
  describe(s, t);
  return t;
}

std::vector<Table> run_scenario(const Scenario& s) {
  s.validate();
  std::vector<Table> out;
  switch (s.task) {
    case Task::Dynamics:
      if (s.sweep) return dynamics_sweep(s);
      out.push_back(to_table(run_dynamics(s, s.params), "dynamics"));
      describe(s, out.back());
      return out;
    case Task::Charging: out.push_back(charging_table(s)); return out;
    case Task::Steady: out.push_back(steady_table(s)); return out;
    case Task::Detuning: out.push_back(sweep_detuning(s)); return out;
  }
  return out;
}

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> v{"fig2",    "fig3a", "fig3b", "fig3c",  "fig4",
                                          "fig5",    "fig6",  "sm-star", "sm-ho", "sm-detuned"};
  return v;
}

namespace {

Scenario base(const std::string& name, ModelKind model, double F, double g = 1.0) {
  Scenario s;
  s.name = name;
  s.model = model;
  s.params.F = F;
  s.params.g = g;
  return s;
}

SweepSpec list_sweep(const std::string& var, std::vector<double> v) {
  std::ostringstream os;
  os << "list(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return {var, std::move(v), os.str()};
}

SweepSpec log_sweep(const std::string& var, double a, double b, std::size_t n) {
  return {var, logspace(a, b, n), "logspace(" + fmt(a) + ", " + fmt(b) + ", " + std::to_string(n) + ")"};
}

SweepSpec lin_sweep(const std::string& var, double a, double b, std::size_t n) {
  return {var, linspace(a, b, n), "linspace(" + fmt(a) + ", " + fmt(b) + ", " + std::to_string(n) + ")"};
}

// Power-law fits of tau against gamma at both ends of a charging sweep.
void add_fits(Table& t, int n) {
  std::vector<double> gs, taus;
  for (const auto& r : t.rows)
    if (std::isfinite(r[1])) gs.push_back(r[0]), taus.push_back(r[1]);
  if (gs.size() < 6) return;
  const std::size_t k = std::max<std::size_t>(3, gs.size() / 6);
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < k; ++i) lo += taus[i] * gs[i] / n;
  for (std::size_t i = gs.size() - k; i < gs.size(); ++i) hi += taus[i] / (n * gs[i]);
  t.metadata.emplace_back("fit_small_gamma_tau_gamma_over_n", fmt(lo / k));
  t.metadata.emplace_back("fit_large_gamma_tau_over_n_gamma", fmt(hi / k));
  const auto best = std::min_element(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
    return std::isfinite(a[1]) && (!std::isfinite(b[1]) || a[1] < b[1]);
  });
  t.metadata.emplace_back("gamma_star", fmt((*best)[0]));
}

}  // namespace

std::vector<Table> run_figure(const std::string& name) {
  std::vector<Table> out;
  auto rename = [&](std::vector<Table> ts, const std::string& prefix) {
    for (auto& t : ts) {
      t.name = prefix + "_" + t.name;
      out.push_back(std::move(t));
    }
  };
  if (name == "fig2" || name == "fig5" || name == "fig6") {
    const ModelKind k = name == "fig2" ? ModelKind::TwoTLS
                        : name == "fig5" ? ModelKind::TwoHO
                                         : ModelKind::TlsHo;
    Scenario s = base(name, k, 0.5);
    s.observables = {"energy", "ergotropy"};
    s.t_max = name == "fig2" ? 30.0 : 40.0;
    s.sweep = name == "fig2" ? list_sweep("gamma_C", {0.01, 1.15, 30.0})
                             : list_sweep("gamma_C", {0.1, 1.0, 4.0, 30.0});
    rename(run_scenario(s), name);
    return out;
  }
  if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
    const double F = name == "fig3a" ? 0.1 : name == "fig3b" ? 10.0 : 0.5;
    Scenario s = base(name, ModelKind::TwoTLS, F);
    s.task = Task::Charging;
    s.solver = Solver::Analytic;
    s.n = 18;
    s.sweep = log_sweep("gamma_C", 0.01, 1000.0, 60);
    auto t = run_scenario(s);
    add_fits(t.front(), s.n);
    rename(std::move(t), name);
    return out;
  }
  if (name == "fig4") {
    Scenario s = base(name, ModelKind::TwoTLS, 0.1);
    s.params.delta_Cd = 0.03;
    s.observables = {"energy"};
    s.t_max = 600.0;
    s.dt = 0.1;
    s.sweep = list_sweep("gamma_C", {0.0, 0.1});
    rename(run_scenario(s), "fig4a");
    Scenario d = base(name, ModelKind::TwoTLS, 0.1);
    d.task = Task::Detuning;
    d.params.gamma_C = 0.1;
    d.sweep = lin_sweep("delta_CB", -0.2, 0.2, 41);
    rename(run_scenario(d), "fig4b");
    return out;
  }
  if (name == "sm-star") {
    for (int N = 1; N <= 3; ++N) {
      Scenario s = base(name, ModelKind::StarTLS, 0.5);
      s.n_batteries = N;
      s.params.gamma_C = 1.0;
      s.task = Task::Steady;
      s.sweep = lin_sweep("F_over_g", 0.05, 2.0, 40);
      rename(run_scenario(s), name + "_N" + std::to_string(N));
    }
    return out;
  }
  if (name == "sm-ho") {
    for (double F : {0.1, 0.5}) {
      Scenario s = base(name, ModelKind::TwoHO, F);
      s.task = Task::Charging;
      s.solver = Solver::Analytic;
      s.n = 18;
      s.sweep = log_sweep("gamma_C", 0.01, 1000.0, 60);
      auto t = run_scenario(s);
      add_fits(t.front(), s.n);
      rename(std::move(t), name + "_F" + fmt(F));
    }
    Scenario st = base(name, ModelKind::TwoHO, 0.1);
    st.task = Task::Steady;
    st.params.gamma_C = 1.0;
    st.sweep = lin_sweep("F_over_g", 0.05, 0.5, 10);
    rename(run_scenario(st), name);
    return out;
  }
  if (name == "sm-detuned") {
    Scenario s = base(name, ModelKind::TwoHO, 0.1);
    s.params.delta_Cd = s.params.delta_Bd = 0.5;
    s.params.gamma_C = 0.1;
    s.solver = Solver::Moments;
    s.t_max = 300.0;
    s.dt = 0.5;
    rename(run_scenario(s), name + "_ho_drive");
    Scenario t = base(name, ModelKind::TwoTLS, 0.1);
    t.task = Task::Detuning;
    t.params.gamma_C = 0.1;
    t.sweep = lin_sweep("delta_CB", -0.2, 0.2, 41);
    rename(run_scenario(t), name + "_tls");
    Scenario h = base(name, ModelKind::TwoHO, 0.1);
    h.task = Task::Detuning;
    h.params.gamma_C = 0.1;
    h.cutoff = 4;
    h.sweep = lin_sweep("delta_CB", -0.5, 0.5, 21);
    rename(run_scenario(h), name + "_ho");
    return out;
  }
  throw ValidationError("figure", "unknown figure '" + name + "'");
}

}  // namespace qb
