#include "qbattery/timeseries.hpp"

#include <algorithm>
#include <cmath>

namespace qb {

bool TimeSeries::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<double>& TimeSeries::add(const std::string& name) {
  if (has(name)) return col(name);
  names.push_back(name);
  columns.emplace_back();
  return columns.back();
}

std::vector<double>& TimeSeries::col(const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorKind::InvalidArgument, "no column '" + name + "'");
  return columns[it - names.begin()];
}

const std::vector<double>& TimeSeries::col(const std::string& name) const {
  return const_cast<TimeSeries*>(this)->col(name);
}

std::vector<double> linspace(double t0, double t1, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = t0;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = t1;
  return v;
}

std::vector<double> uniform_grid(double t1, double dt) {
  const auto n = static_cast<std::size_t>(std::llround(std::ceil(t1 / dt - 1e-9))) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::min(t1, dt * static_cast<double>(i));
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  std::vector<double> v = linspace(std::log10(a), std::log10(b), n);
  for (auto& x : v) x = std::pow(10.0, x);
  if (n > 0) {
    v.front() = a;
    v.back() = b;
  }
  return v;
}

}  // namespace qb
