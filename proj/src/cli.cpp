#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "qbattery/analytic.hpp"
#include "qbattery/cli.hpp"
#include "qbattery/lindblad.hpp"
#include "qbattery/moments.hpp"

namespace qb {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const Table& t) {
  os << "# table: " << t.name << "\n";
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << "\n";
  for (const auto& w : t.warnings) os << "# warning: " << w << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["wall_time_s"] = m.wall_time_s;
  j["warnings"] = m.warnings;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for '" + path.string() + "'");
}

void write_tables(const std::vector<Table>& tables, const fs::path& dir, const std::string& prefix,
                  const std::string& manifest_stem, RunManifest& m) {
  if (!dir.empty()) fs::create_directories(dir);
  for (const auto& t : tables) {
    const fs::path p = dir / ((prefix.empty() ? "" : prefix + "_") + t.name + ".csv");
    std::ostringstream os;
    write_csv(os, t);
    write_file(p, os.str());
    m.outputs.push_back(p.string());
    for (const auto& w : t.warnings) m.warnings.push_back(t.name + ": " + w);
  }
  write_file(dir / (manifest_stem + ".manifest.json"), manifest_json(m));
}

}  // namespace

void write_outputs(const std::vector<Table>& tables, const std::string& dir, const std::string& prefix,
                   RunManifest& m) {
  write_tables(tables, dir, prefix, prefix, m);
}

bool selftest(std::ostream& out) {
  bool all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    all = all && ok;
  };
  auto params = [](double F, double gamma) {
    Params p;
    p.F = F;
    p.gamma_C = gamma;
    return p;
  };

  double d1 = 0, d2 = 0, d2det = 0;
  for (double F : {0.1, 0.5, 2.0})
    for (double gm : {0.3, 1.0, 7.0}) {
      const auto [m1, m2] = tls_moment_systems(params(F, gm));
      const double want = 4 * std::pow(F, 4) * gm * gm * (4 * F * F + 1);
      d1 = std::max(d1, std::abs(m1.matrix.determinant() / want - 1));
      d2 = std::max(d2, std::abs(m2.matrix.determinant()));
      Params q = params(F, gm);
      q.delta_Cd = q.delta_Bd = 0.4;
      const double want2 = -2 * F * F * gm * 0.16;
      d2det = std::max(d2det, std::abs(tls_moment_systems(q).second.matrix.determinant() - want2));
    }
  report("det M1 = 4F^4 g^2 gamma^2 (4F^2 + g^2)", d1 < 1e-9, "max rel err " + format_double(d1));
  report("det M2 = 0 at resonance", d2 < 1e-12, "max |det| " + format_double(d2));
  report("det M2 = -2F^2 gamma delta^2 for a detuned drive", d2det < 1e-12, "max err " + format_double(d2det));

  const auto grid = linspace(0, 30, 301);
  double tri = 0;
  for (auto [F, gm] : {std::pair{0.5, 1.15}, {0.1, 0.1}, {10.0, 10.0}, {0.5, 0.0}}) {
    const Params p = params(F, gm);
    const TimeSeries mo = evolve_moments(tls_moment_systems(p).first, grid);
    const ModelSpec m = build_two_tls(p);
    const TimeSeries li = integrate(m, initial_state(m), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double c = tls_energy_closed(p, grid[i]);
      tri = std::max({tri, std::abs(c - mo.col("energy")[i]), std::abs(c - li.col("energy")[i])});
    }
  }
  report("two-TLS closed form / moments / Lindblad", tri < 1e-6, "max diff " + format_double(tri));

  double ho = 0;
  {
    const Params p = params(0.3, 1.0);
    const TimeSeries mo = evolve_moments(ho_resonant_moment_system(p), grid);
    const ModelSpec m = build_two_ho(p, 10, Frame::Displaced);
    const TimeSeries li = integrate(m, initial_state(m), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      ho = std::max({ho, std::abs(mo.col("energy")[i] - li.col("energy")[i]),
                     std::abs(mo.col("energy")[i] - ho_energy_closed_resonant(p, grid[i]))});
  }
  report("two-HO closed form / moments / Lindblad", ho < 1e-6, "max diff " + format_double(ho));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  double erg = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + trial % 3;
    ComplexMatrix a(dim, dim), h(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = cplx(nd(rng), nd(rng)), h(i, j) = cplx(nd(rng), nd(rng));
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    h = hermitize(h);
    const auto sr = herm_eig(rho), sh = herm_eig(h);
    std::vector<int> perm(dim);
    for (int i = 0; i < dim; ++i) perm[i] = i;
    double passive = INFINITY;
    do {
      double e = 0;
      for (int i = 0; i < dim; ++i) e += sr.eigenvalues(i) * sh.eigenvalues(perm[i]);
      passive = std::min(passive, e);
    } while (std::next_permutation(perm.begin(), perm.end()));
    erg = std::max(erg, std::abs(ergotropy(rho, h) - (energy(rho, h) - passive)));
  }
  report("ergotropy vs permutation search", erg < 1e-12, "max diff " + format_double(erg));

  const ModelSpec m = build_two_tls(params(0.5, 1.15));
  const ComplexMatrix rb = battery_state(m, steady_state(m));
  const double ss = std::max(std::abs(energy(rb, m.battery_h) - 0.5), std::abs(ergotropy(rb, m.battery_h) - 0.25));
  report("two-TLS steady energy and ergotropy", ss < 1e-8, "max diff " + format_double(ss));
  return all;
}

namespace {

struct OutputTarget {
  fs::path dir;
  std::string stem;
};

OutputTarget target_for(const Scenario& s, const std::string& override_path) {
  const fs::path p = !override_path.empty() ? fs::path(override_path) : fs::path(s.output.empty() ? s.name : s.output);
  return {p.parent_path(), p.filename().string()};
}

int run_config(const std::string& command, const std::string& path, const std::string& output, bool need_sweep,
               std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = parse_config(path);
  if (need_sweep && !s.sweep) throw ValidationError("sweep", "the sweep command needs a [sweep] block");
  const auto tables = run_scenario(s);
  RunManifest m;
  m.command = command;
  m.config_hash = config_hash(emit_config(s));
  m.seed = s.trajectories.seed;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const OutputTarget t = target_for(s, output);
  write_tables(tables, t.dir, t.stem, t.stem, m);
  for (const auto& w : m.warnings) err << "warning: " << w << "\n";
  for (const auto& o : m.outputs) out << o << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dephasing-assisted quantum battery charging: simulation and figure data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, output;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario config");
  simulate->add_option("config", config, "Config file")->required();
  simulate->add_option("-o,--output", output, "Output path prefix (overrides the config)");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario config with a [sweep] block");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("-o,--output", output, "Output path prefix (overrides the config)");

  std::string model = "two_tls", solver = "auto";
  double F = 0, g = 1, gamma = 0, delta_cd = 0, delta_bd = 0;
  int n = 1, cutoff = 0;
  auto* charging = app.add_subcommand("charging-time", "Charging time of one parameter set");
  charging->add_option("--model", model, "two_tls, two_ho, tls_ho or star_tls")->capture_default_str();
  charging->add_option("--F", F, "Drive strength")->required();
  charging->add_option("--g", g, "Charger-battery coupling")->capture_default_str();
  charging->add_option("--gamma", gamma, "Charger dephasing rate")->required();
  charging->add_option("--n", n, "Threshold exponent")->capture_default_str();
  charging->add_option("--solver", solver, "auto, lindblad, moments or analytic")->capture_default_str();
  charging->add_option("--delta-cd", delta_cd, "Charger-drive detuning")->capture_default_str();
  charging->add_option("--delta-bd", delta_bd, "Battery-drive detuning")->capture_default_str();
  charging->add_option("--cutoff", cutoff, "Fock cutoff, 0 = automatic")->capture_default_str();

  std::string figure, outdir = ".";
  auto* fig = app.add_subcommand("figure", "Regenerate the data behind a figure");
  fig->add_option("name", figure, "Figure name")->required()->check(CLI::IsMember(figure_names()));
  fig->add_option("-o,--outdir", outdir, "Output directory")->capture_default_str();

  auto* self = app.add_subcommand("selftest", "Run the oracle cross-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return run_config("simulate", config, output, false, out, err);
    if (*sweep) return run_config("sweep", config, output, true, out, err);
    if (*charging) {
      Scenario s;
      s.task = Task::Charging;
      s.model = model_kind_from_string(model);
      s.params.F = F;
      s.params.g = g;
      s.params.gamma_C = gamma;
      s.params.delta_Cd = delta_cd;
      s.params.delta_Bd = delta_bd;
      s.n = n;
      s.cutoff = cutoff;
      if (solver == "auto") {
        const bool closed = s.model == ModelKind::TwoTLS || (s.model == ModelKind::TwoHO && s.params.resonant());
        s.solver = closed ? Solver::Analytic : Solver::Lindblad;
      } else {
        s.solver = solver_from_string(solver);
      }
      s.validate();
      const ChargingReport r = charging_report(s, s.params);
      out << "tau = " << format_double(r.tau) << "\n"
          << "n = " << r.n << "\n"
          << "e_ss = " << format_double(r.e_ss) << "\n"
          << "e_max_transient = " << format_double(r.e_max_transient) << "\n"
          << "gamma_C = " << format_double(r.gamma_C) << "\n"
          << "horizon = " << format_double(r.horizon) << "\n"
          << "converged = " << (r.converged ? "true" : "false") << "\n";
      return 0;
    }
    if (*fig) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto tables = run_figure(figure);
      RunManifest m;
      m.command = "figure " + figure;
      m.config_hash = config_hash("figure " + figure);
      m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_tables(tables, outdir, "", figure, m);
      for (const auto& w : m.warnings) err << "warning: " << w << "\n";
      for (const auto& o : m.outputs) out << o << "\n";
      return 0;
    }
    if (*self) return selftest(out) ? 0 : 1;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qb
