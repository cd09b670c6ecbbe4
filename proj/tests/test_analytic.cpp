#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbattery/analytic.hpp"

using namespace qb;

namespace {
Params tls(double F, double gamma) {
  Params p;
  p.F = F;
  p.gamma_C = gamma;
  return p;
}
}  // namespace

TEST_CASE("chi basics") {
  for (double f : {0.5, 0.01, 3.0})
    for (double gm : {0.0, 0.7, 30.0}) CHECK(chi({gm, 1.0, f}, 0.0) == doctest::Approx(1.0));
  for (double t : {0.3, 2.0, 17.0}) {
    const double f = 0.8;
    CHECK(chi({0.0, 1.0, f}, t) == doctest::Approx(std::cos(std::sqrt(2 * f) * t)).epsilon(1e-12));
  }
  // Critical damping: gamma^2 = 32 f g^2.
  const double f = 0.5, gc = 4.0;
  for (double t : {0.5, 3.0, 10.0}) {
    CHECK(std::abs(chi({gc, 1.0, f}, t) - (1 + gc * t / 4)) < 1e-9);
    const double eps = 1e-7;
    CHECK(std::abs(chi({gc - eps, 1.0, f}, t) - chi({gc + eps, 1.0, f}, t)) < 1e-6 * (1 + t * t));
  }
}

TEST_CASE("damped chi matches exp(-gamma t/4) chi where both are finite") {
  for (double gm : {0.2, 3.0, 4.0, 9.0})
    for (double f : {0.5, 0.02, 2.5})
      for (double t : {0.1, 1.0, 7.0}) {
        const ChiArgs a{gm, 1.0, f};
        CHECK(damped_chi(a, t) == doctest::Approx(std::exp(-gm * t / 4) * chi(a, t)).epsilon(1e-12));
      }
  // No overflow deep in the overdamped regime.
  CHECK(std::isfinite(damped_chi({1000.0, 1.0, 0.01}, 1e6)));
}

TEST_CASE("resonant two-TLS energy") {
  for (double F : {0.1, 0.5, 10.0})
    for (double gm : {0.0, 0.3, 1.15, 30.0}) {
      Params p = tls(F, gm);
      CHECK(std::abs(tls_energy_closed(p, 0.0)) < 1e-14);
      for (double t = 0.0; t < 50; t += 0.37) {
        const double e = tls_energy_closed(p, t);
        CHECK(e >= -1e-12);
        CHECK(e <= 1.0 + 1e-9);
      }
      if (gm > 0) CHECK(tls_energy_closed(p, 1e7) == doctest::Approx(0.5).epsilon(1e-9));
    }
  // Zeno freeze: energy at fixed t vanishes as gamma grows.
  CHECK(tls_energy_closed(tls(0.5, 1e6), 1.0) < 1e-5);
  Params d = tls(0.5, 1.0);
  d.delta_Cd = 0.1;
  CHECK_THROWS_AS(tls_energy_closed(d, 1.0), Error);
  CHECK_THROWS_AS(tls_sigma_minus_closed(d, 1.0), Error);
}

TEST_CASE("resonant two-TLS <sm_B>") {
  for (double gm : {0.3, 1.0, 8.0}) {
    Params p = tls(0.5, gm);
    CHECK(std::abs(tls_sigma_minus_closed(p, 0.0)) < 1e-15);
    CHECK(tls_sigma_minus_closed(p, 1e6).real() == doctest::Approx(-0.25));
  }
}

TEST_CASE("steady values") {
  CHECK(tls_steady(tls(0.5, 1.0)).ergotropy == doctest::Approx(0.25));
  CHECK(tls_steady(tls(0.5, 1.0)).energy == doctest::Approx(0.5));
  CHECK(tls_steady(tls(1e-9, 1.0)).ergotropy < 1e-8);
  CHECK(tls_steady(tls(10.0, 1.0)).ergotropy == doctest::Approx(10.0 / 401.0));
  Params cb = tls(0.5, 1.0);
  cb.delta_Cd = 0.2;
  CHECK(tls_steady(cb).ergotropy == doctest::Approx(0.25));
}

TEST_CASE("ergotropy closed form tends to the steady value") {
  CHECK(tls_ergotropy_closed(tls(0.5, 1.15), 1e5) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(tls_ergotropy_closed(tls(0.5, 1.15), 0.0)) < 1e-14);
}

TEST_CASE("large-gamma three-exponential form") {
  // Deviation measured against the steady energy scale omega_B/2.
  for (double F : {0.1, 0.5, 10.0}) {
    Params p = tls(F, 100.0);
    double worst = 0.0;
    for (double t = 1.0 / p.gamma_C; t < 400; t *= 1.05)
      worst = std::max(worst, std::abs(tls_energy_large_gamma(p, t) - tls_energy_closed(p, t)));
    CHECK(worst / 0.5 < 1e-3);
  }
}

TEST_CASE("resonant two-HO energy") {
  Params p = tls(0.1, 0.0);
  CHECK(std::abs(ho_energy_closed_resonant(p, 0.0)) < 1e-15);
  CHECK(ho_energy_closed_resonant(p, M_PI) == doctest::Approx(0.04).epsilon(1e-12));
  p.gamma_C = 0.7;
  CHECK(ho_energy_closed_resonant(p, 1e5) == doctest::Approx(0.015).epsilon(1e-10));
  // F only sets the scale.
  for (double gm : {0.1, 4.0, 30.0})
    for (double t : {0.5, 3.0, 20.0}) {
      const double a = ho_energy_closed_resonant(tls(0.1, gm), t) / 0.01;
      const double b = ho_energy_closed_resonant(tls(2.0, gm), t) / 4.0;
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("detuned closed-case HO energies") {
  Params p = tls(0.1, 0.0);
  for (double t : {0.0, 1.3, 7.7}) {
    const double res = ho_energy_closed_resonant(p, t);
    CHECK(ho_closed_detuned(p, t, HoDetunedCase::DetunedDrive) == doctest::Approx(res).epsilon(1e-12));
    CHECK(ho_closed_detuned(p, t, HoDetunedCase::DetunedCB) == doctest::Approx(res).epsilon(1e-12));
  }
  p.delta_Cd = p.delta_Bd = 0.5;
  const double peak = 4 * 0.01 / (0.75 * 0.75) * 0.5;
  CHECK(ho_detuned_drive_max(p) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(peak == doctest::Approx(0.0356).epsilon(2e-3));
  CHECK(ho_closed_detuned(p, M_PI, HoDetunedCase::DetunedDrive) == doctest::Approx(peak).epsilon(1e-12));

  Params pole = p;
  pole.delta_Cd = pole.delta_Bd = 1.0;
  CHECK_THROWS_AS(ho_closed_detuned(pole, 1.0, HoDetunedCase::DetunedDrive), Error);

  for (double d : {-1.0, 1.0}) {
    Params cb = tls(0.1, 0.0);
    cb.delta_Cd = d;
    for (double t = 0; t < 100; t += 0.5)
      CHECK(std::isfinite(ho_closed_detuned(cb, t, HoDetunedCase::DetunedCB)));
  }
}

TEST_CASE("asymptotic charging times") {
  Params p = tls(0.5, 0.1);
  CHECK(charging_time_asymptotic(p, 1, Regime::SmallGamma).tau == doctest::Approx(40.0));
  CHECK(charging_time_asymptotic(p, 1, Regime::SmallGamma).regime_consistent);
  Params w = tls(0.1, 10.0);
  CHECK(charging_time_asymptotic(w, 1, Regime::LargeGammaWeakDrive).tau == doctest::Approx(1e5));
  CHECK(charging_time_asymptotic(w, 1, Regime::LargeGammaWeakDrive).regime_consistent);
  CHECK(charging_time_asymptotic(w, 1, Regime::LargeGammaStrongDrive).tau == doctest::Approx(5.0));
  CHECK_FALSE(charging_time_asymptotic(w, 1, Regime::LargeGammaStrongDrive).regime_consistent);
  CHECK(charging_time_asymptotic(p, 2, Regime::HoSmallGamma).tau == doctest::Approx(80.0));
  CHECK(charging_time_asymptotic(w, 2, Regime::HoLargeGamma).tau == doctest::Approx(10.0));
}

TEST_CASE("optimal dephasing estimates") {
  CHECK(optimal_dephasing(tls(0.1, 0.0), OptimalKind::TwoTLS) == doctest::Approx(0.08));
  CHECK(optimal_dephasing(tls(10.0, 0.0), OptimalKind::TwoTLS) == doctest::Approx(4.0));
  for (double F : {0.1, 0.5, 10.0})
    CHECK(optimal_dephasing(tls(F, 0.0), OptimalKind::TwoHO) == doctest::Approx(4.0));
  const double mid = optimal_dephasing(tls(0.5, 0.0), OptimalKind::TwoTLS);
  CHECK(mid == doctest::Approx(std::sqrt(32 * (1.5 - std::sqrt(2.0)))));
}
