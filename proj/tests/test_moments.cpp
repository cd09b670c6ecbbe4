#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbattery/analytic.hpp"
#include "qbattery/lindblad.hpp"
#include "qbattery/moments.hpp"

using namespace qb;

namespace {

Params params(double F, double gamma, double dC = 0.0, double dB = 0.0, double g = 1.0) {
  Params p;
  p.F = F;
  p.g = g;
  p.gamma_C = gamma;
  p.delta_Cd = dC;
  p.delta_Bd = dB;
  return p;
}

// Full-space operators for every two-TLS moment, in the order of the two systems.
std::vector<ComplexMatrix> tls_moment_ops() {
  const std::vector<int> d{2, 2};
  const ComplexMatrix spC = embed(sigma_plus(), d, 0), smC = embed(sigma_minus(), d, 0);
  const ComplexMatrix smB = embed(sigma_minus(), d, 1);
  const ComplexMatrix szC = embed(sigma_z(), d, 0), szB = embed(sigma_z(), d, 1);
  return {szB, szC, spC * smB, szC * smB, smC * smB, smC, smB, smC * szB, szC * szB};
}

// Split complex expectation values into the real components of (V1, V2).
std::vector<double> split(const std::vector<cplx>& m) {
  return {m[0].real(), m[1].real(), m[2].real(), m[2].imag(), m[3].real(), m[3].imag(),
          m[4].real(), m[4].imag(), m[5].real(), m[5].imag(), m[6].real(), m[6].imag(),
          m[7].real(), m[7].imag(), m[8].real()};
}

}  // namespace

// Determinant of M1 from a symbolic projection of the adjoint Liouvillian onto the V1 basis.
double det_m1(double F, double g, double gm, double dC, double dB) {
  return F * F * g * g * gm * gm *
         (32 * std::pow(F, 4) - 16 * F * F * dB * dB - 16 * F * F * dB * dC + 8 * F * F * g * g +
          4 * std::pow(dB, 4) + 8 * std::pow(dB, 3) * dC + 4 * dB * dB * dC * dC + dB * dB * gm * gm) /
         2;
}

TEST_CASE("determinant identities at resonance") {
  for (double F : {0.1, 0.5, 2.0})
    for (double gm : {0.3, 1.0, 7.0})
      for (double g : {0.5, 1.0}) {
        auto [s1, s2] = tls_moment_systems(params(F, gm, 0, 0, g));
        const double expected = 4 * std::pow(F, 4) * g * g * gm * gm * (4 * F * F + g * g);
        CHECK(s1.matrix.determinant() == doctest::Approx(expected).epsilon(1e-8));
        CHECK(std::abs(s2.matrix.determinant()) < 1e-10);
      }
  auto [s1, s2] = tls_moment_systems(params(0.5, 0.3));
  CHECK(s1.matrix.determinant() == doctest::Approx(0.045).epsilon(1e-10));
}

TEST_CASE("determinant identities with detuning") {
  const double F = 0.5, g = 1.0, gm = 0.7;
  for (double dC : {0.2, -0.4, 1.3})
    for (double dB : {0.0, 0.3, -0.7}) {
      auto [s1, s2] = tls_moment_systems(params(F, gm, dC, dB));
      CHECK(s1.matrix.determinant() == doctest::Approx(det_m1(F, g, gm, dC, dB)).epsilon(1e-8));
      CHECK(s2.matrix.determinant() ==
            doctest::Approx(-2 * F * F * gm * dB * dB).epsilon(1e-10));
    }
  for (double d : {0.2, -0.4, 1.3}) {
    auto [t1, t2] = tls_moment_systems(params(F, gm, d, d));
    CHECK(t2.matrix.determinant() == doctest::Approx(-2 * F * F * gm * d * d).epsilon(1e-10));
  }
}

TEST_CASE("initial vectors and trivial evolution") {
  auto [s1, s2] = tls_moment_systems(params(0.0, 0.0));
  CHECK(s1.v0(0) == -1.0);
  CHECK(s1.v0(1) == -1.0);
  CHECK(s1.v0.tail(8).isZero(0.0));
  CHECK(s2.v0(4) == 1.0);
  TimeSeries ts = evolve_moments(s1, linspace(0, 20, 41));
  for (std::size_t k = 0; k < 10; ++k)
    for (double v : ts.columns[k]) CHECK(std::abs(v - s1.v0(k)) < 1e-14);
  TimeSeries t2 = evolve_moments(s2, {0.0, 1.0});
  CHECK(t2.col("<sz_C sz_B>")[0] == 1.0);
}

TEST_CASE("moment systems reproduce the closed forms") {
  const auto grid = linspace(0, 30, 301);
  Params p = params(0.5, 1.0);
  auto [s1, s2] = tls_moment_systems(p);
  TimeSeries ts = evolve_moments(s1, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sz = 2 * tls_energy_closed(p, grid[i]) - 1;
    CHECK(std::abs(ts.col("<sz_B>")[i] - sz) < 1e-8);
    CHECK(std::abs(ts.col("energy")[i] - tls_energy_closed(p, grid[i])) < 1e-9);
  }
  Params q = params(0.1, 0.3);
  auto [q1, q2] = tls_moment_systems(q);
  TimeSeries v2 = evolve_moments(q2, {0.0, 10.0});
  CHECK(std::abs(v2.col("Re<sm_B>")[1] - tls_sigma_minus_closed(q, 10.0).real()) < 1e-8);
  CHECK(std::abs(v2.col("Im<sm_B>")[1]) < 1e-8);
}

TEST_CASE("moment systems agree with the Lindblad solution") {
  const auto grid = linspace(0, 50, 201);
  const auto ops = tls_moment_ops();
  std::vector<Params> cases;
  for (double gm : {0.0, 0.1, 1.0, 10.0})
    for (double F : {0.1, 0.5, 10.0}) cases.push_back(params(F, gm));
  cases.push_back(params(0.5, 0.4, 0.3, 0.0));
  cases.push_back(params(0.3, 0.8, 0.25, 0.25));
  cases.push_back(params(0.7, 0.5, -0.2, 0.35, 1.3));
  for (const Params& p : cases) {
    auto [s1, s2] = tls_moment_systems(p);
    TimeSeries m1 = evolve_moments(s1, grid), m2 = evolve_moments(s2, grid);
    IntegrateOptions o;
    o.store_states = true;
    TimeSeries lb = integrate(build_two_tls(p), initial_state(build_two_tls(p)), grid, o);
    double worst = 0.0, pauli = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<cplx> ev;
      for (const auto& op : ops) ev.push_back(expect(op, lb.states[i]));
      const auto ref = split(ev);
      for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(m1.columns[k][i] - ref[k]));
      for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(m2.columns[k][i] - ref[10 + k]));
      pauli = std::max({pauli, std::abs(m1.columns[0][i]) - 1.0,
                        std::hypot(m2.columns[0][i], m2.columns[1][i]) - 0.5});
    }
    CHECK_MESSAGE(worst < 1e-7, "F=" << p.F << " gamma=" << p.gamma_C << " worst=" << worst);
    CHECK(pauli <= 1e-7);
  }
}

TEST_CASE("resonant HO moment system") {
  auto zero = evolve_moments(ho_resonant_moment_system(params(0.0, 0.5)), linspace(0, 10, 11));
  for (double e : zero.col("energy")) CHECK(e == 0.0);

  Params p = params(0.1, 0.5);
  MomentSystem s = ho_resonant_moment_system(p);
  const auto grid = linspace(0, 40, 401);
  TimeSeries ts = evolve_moments(s, grid);
  CHECK(std::abs(ts.col("energy")[0]) < 1e-16);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(ts.col("energy")[i] - ho_energy_closed_resonant(p, grid[i])) < 1e-8);
  CHECK_THROWS_AS(ho_resonant_moment_system(params(0.1, 0.5, 0.1, 0.0)), Error);
}

TEST_CASE("detuned HO moment system") {
  auto zero = evolve_moments(ho_detuned_moment_system(params(0.0, 0.5, 0.3, 0.1)), linspace(0, 10, 11));
  for (double e : zero.col("energy")) CHECK(e == 0.0);

  // Same observable in two frames at resonance.
  for (double gm : {0.0, 0.5, 6.0}) {
    Params p = params(0.1, gm);
    const auto grid = linspace(0, 30, 121);
    TimeSeries a = evolve_moments(ho_detuned_moment_system(p), grid);
    TimeSeries b = evolve_moments(ho_resonant_moment_system(p), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(a.col("energy")[i] - b.col("energy")[i]) < 1e-8);
  }

  // Closed-case detuned forms.
  for (double g : {1.0, 1.7}) {
    const auto grid = linspace(0, 25, 101);
    Params dd = params(0.1, 0.0, 0.5, 0.5, g);
    Params cb = params(0.1, 0.0, 0.6, 0.0, g);
    TimeSeries a = evolve_moments(ho_detuned_moment_system(dd), grid, MomentPath::Ode);
    TimeSeries b = evolve_moments(ho_detuned_moment_system(cb), grid, MomentPath::Ode);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(a.col("energy")[i] - ho_closed_detuned(dd, grid[i], HoDetunedCase::DetunedDrive)) < 1e-9);
      CHECK(std::abs(b.col("energy")[i] - ho_closed_detuned(cb, grid[i], HoDetunedCase::DetunedCB)) < 1e-9);
    }
  }

  // Long-time linear growth.
  Params p = params(0.1, 0.1, 0.5, 0.5);
  TimeSeries ts = evolve_moments(ho_detuned_moment_system(p), {1000.0, 1100.0});
  const double slope = (ts.col("energy")[1] - ts.col("energy")[0]) / 100.0;
  CHECK(slope == doctest::Approx(ho_detuned_growth_rate(p)).epsilon(1e-3));
  CHECK(ho_detuned_growth_rate(p) == doctest::Approx(2.22e-4).epsilon(1e-3));
}

TEST_CASE("exponential and ODE paths agree") {
  Params p = params(0.2, 0.3, 0.4, 0.1);
  // The detuned HO matrix conserves n_B + n_C under the coupling, so it is singular.
  MomentSystem s = ho_detuned_moment_system(p);
  CHECK(s.matrix.fullPivLu().rank() == 7);
  s.matrix(0, 0) -= 0.05;
  s.matrix(1, 1) -= 0.08;
  const auto grid = linspace(0, 40, 81);
  TimeSeries a = evolve_moments(s, grid, MomentPath::Exponential);
  TimeSeries b = evolve_moments(s, grid, MomentPath::Ode);
  for (std::size_t k = 0; k < a.columns.size(); ++k)
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(a.columns[k][i] - b.columns[k][i]) < 1e-9);

  auto [s1, s2] = tls_moment_systems(params(0.5, 1.0));
  TimeSeries c = evolve_moments(s1, grid, MomentPath::Exponential);
  TimeSeries d = evolve_moments(s1, grid, MomentPath::Ode);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(c.columns[0][i] - d.columns[0][i]) < 1e-9);

  // A singular inhomogeneous system refuses the closed path and falls back under Auto.
  MomentSystem sing = ho_detuned_moment_system(p);
  CHECK_THROWS_AS(evolve_moments(sing, grid, MomentPath::Exponential), Error);
  TimeSeries f = evolve_moments(sing, grid);
  CHECK_FALSE(f.warnings.empty());
  MomentSystem zero = sing;
  zero.matrix.setZero();
  TimeSeries z = evolve_moments(zero, grid);
  CHECK(z.col("Im<a_C>").back() == doctest::Approx(-p.F * 40.0));
}

TEST_CASE("HO detuned system agrees with the truncated Lindblad solution") {
  Params p = params(0.1, 0.3, 0.4, 0.15);
  const auto grid = linspace(0, 30, 61);
  TimeSeries m = evolve_moments(ho_detuned_moment_system(p), grid);
  ModelSpec model = build_two_ho(p, 8);
  TimeSeries l = integrate(model, initial_state(model), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(m.col("energy")[i] - l.col("energy")[i]) < 1e-7);
}
