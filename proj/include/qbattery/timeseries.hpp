#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbattery/opalg.hpp"

namespace qb {

/// Time grid with named observable columns and, optionally, the states themselves.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<ComplexMatrix> states;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> metadata;

  // Bookkeeping filled by the solvers.
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_drift = 0.0;

  bool has(const std::string& name) const;
  std::vector<double>& add(const std::string& name);
  std::vector<double>& col(const std::string& name);
  const std::vector<double>& col(const std::string& name) const;
  std::size_t size() const { return times.size(); }
};

/// Uniform grid t0, t0+dt, ..., up to and including t1 (within roundoff).
std::vector<double> linspace(double t0, double t1, std::size_t n);
std::vector<double> uniform_grid(double t1, double dt);
std::vector<double> logspace(double a, double b, std::size_t n);

}  // namespace qb
