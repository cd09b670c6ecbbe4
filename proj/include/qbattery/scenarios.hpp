#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbattery/expsum.hpp"
#include "qbattery/metrics.hpp"
#include "qbattery/models.hpp"
#include "qbattery/stochastic.hpp"

namespace qb {

enum class Solver { Lindblad, Moments, Analytic, Stochastic };
enum class Task { Dynamics, Charging, Steady, Detuning };

const char* to_string(Solver s);
const char* to_string(Task t);
Solver solver_from_string(const std::string& s);
Task task_from_string(const std::string& s);

struct SweepSpec {
  std::string variable;
  std::vector<double> values;
  std::string grid;  // textual form, e.g. "logspace(0.01, 100, 60)"
  bool operator==(const SweepSpec&) const = default;
};

/// Variables a sweep may vary.
const std::vector<std::string>& sweep_variables();
/// Params with one named variable replaced. `F_over_g` sets F = v g; `delta_CB` sets
/// delta_Cd = delta_Bd + v; `delta_drive` sets delta_Cd = delta_Bd = v.
Params with_variable(const Params& p, const std::string& name, double v);

struct Scenario {
  std::string name = "run";
  Task task = Task::Dynamics;
  ModelKind model = ModelKind::TwoTLS;
  Params params;
  int n_batteries = 1;
  int cutoff = 0;  // 0 = automatic
  Solver solver = Solver::Lindblad;
  std::vector<std::string> observables{"energy"};
  double t_max = 30.0;
  double dt = 0.05;  // output spacing
  int n = 1;         // charging-time exponent
  std::optional<SweepSpec> sweep;
  TrajectoryConfig trajectories;
  std::string output;

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> warnings;
};

/// Model for a parameter set; resonant HO batteries use the displaced frame.
ModelSpec scenario_model(const Scenario& s, const Params& p);

/// Battery energy of the scenario model as a sum of exponentials.
ExpSum energy_terms(const Scenario& s, const Params& p);

/// Steady energy from closed forms where known and the solver is not Lindblad, else the
/// long-time limit of the dynamics.
double steady_energy(const Scenario& s, const Params& p, const ExpSum& e);

ChargingReport charging_report(const Scenario& s, const Params& p);

struct SteadyReport {
  double energy;
  double ergotropy;
};
SteadyReport steady_report(const Scenario& s, const Params& p);

/// Closed-case (gamma_C = 0) transient maximum of energy and ergotropy.
struct TransientMax {
  double energy;
  double ergotropy;
  double time;
  double window;
};
TransientMax closed_transient_max(const Scenario& s, const Params& p);

/// Time series for a single parameter set.
TimeSeries run_dynamics(const Scenario& s, const Params& p);

std::vector<Table> run_scenario(const Scenario& s);
Table sweep_detuning(const Scenario& s);

const std::vector<std::string>& figure_names();
std::vector<Table> run_figure(const std::string& name);

Table to_table(const TimeSeries& ts, const std::string& name);

}  // namespace qb
