#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qbattery/scenarios.hpp"

namespace qb {

inline constexpr const char* kVersion = "1.0.0";

/// Config format: `key = value` lines, `#` comments, optional [run] header for the
/// top-level keys, a [trajectories] section and a [sweep] section holding one
/// `variable = linspace(a, b, n) | logspace(a, b, n) | list(v, ...)` line.
Scenario parse_config_text(const std::string& text);
Scenario parse_config(const std::string& path);

/// Canonical config; parse_config_text(emit_config(s)) == s.
std::string emit_config(const Scenario& s);

/// Grid spec to values. Throws ValidationError("sweep") on a malformed spec.
std::vector<double> parse_grid(const std::string& spec);

/// FNV-1a 64 of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

/// 17 significant digits.
std::string format_double(double v);

/// `#`-prefixed metadata and warnings, then the header row and the data rows.
void write_csv(std::ostream& os, const Table& t);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);

/// Writes `<dir>/<prefix>_<table>.csv` per table and `<dir>/<prefix>.manifest.json`.
/// Fills m.outputs and m.warnings.
void write_outputs(const std::vector<Table>& tables, const std::string& dir, const std::string& prefix,
                   RunManifest& m);

/// Oracle cross-checks; one line per check. True when all pass.
bool selftest(std::ostream& out);

/// Exit codes: 0 success, 1 solver error, 2 config or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qb
