#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "omech/core.hpp"
#include "omech/device.hpp"

using namespace omech;
using namespace omech::device;

namespace {

// Bisection on the standard-library Bessel function.
double bessel_zero_oracle(int n, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((std::cyl_bessel_j(n, lo) < 0) == (std::cyl_bessel_j(n, mid) < 0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Midpoint Riemann sum with n cells.
template <class F>
double riemann(F f, double a, double b, long n) {
  const double h = (b - a) / n;
  double s = 0;
  for (long i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST_CASE("Bessel zeros") {
  CHECK(bessel_zero(0, 1) == doctest::Approx(bessel_zero_oracle(0, 2, 3)).epsilon(1e-12));
  CHECK(std::abs(bessel_zero(0, 1) - 2.40483) < 5e-6);
  CHECK(bessel_zero(0, 2) == doctest::Approx(bessel_zero_oracle(0, 5, 6)).epsilon(1e-12));
  CHECK(bessel_zero(1, 1) == doctest::Approx(bessel_zero_oracle(1, 3.5, 4.5)).epsilon(1e-12));
  CHECK(bessel_zero(2, 3) == doctest::Approx(bessel_zero_oracle(2, 11.5, 12)).epsilon(1e-12));
  CHECK_OMECH_ERROR(bessel_zero(0, 0), ErrorCode::InvalidModeIndex);
  CHECK_OMECH_ERROR(bessel_zero(-1, 1), ErrorCode::InvalidModeIndex);
}

TEST_CASE("drum mode") {
  const auto g = paper_geometry();
  const auto m = drum_mode(g);
  CHECK(m.Omega_m == doctest::Approx(2.404825557695773 / 75e-6 * std::sqrt(350e6 / 2700) / (2 * std::numbers::pi)).epsilon(1e-10));
  CHECK(std::abs(m.Omega_m / 1.84e6 - 1) < 0.03);
  CHECK(m.shape(0) == doctest::Approx(1.0));
  CHECK(std::abs(m.shape(g.R)) < 1e-12);
  auto g4 = g;
  g4.sigma_m *= 4;
  CHECK(drum_mode(g4).Omega_m == doctest::Approx(2 * m.Omega_m).epsilon(1e-14));
  CHECK_OMECH_ERROR(drum_mode(g, 0, 0), ErrorCode::InvalidModeIndex);
}

TEST_CASE("geometry validation") {
  auto g = paper_geometry();
  g.R_b = g.R * 1.1;
  CHECK_OMECH_ERROR(check_geometry(g), ErrorCode::ConfigError);
  g = paper_geometry();
  g.xi_par = 1.2;
  CHECK_OMECH_ERROR(check_geometry(g), ErrorCode::ConfigError);
  g = paper_geometry();
  g.d = 0;
  CHECK_OMECH_ERROR(check_geometry(g), ErrorCode::ConfigError);
}

TEST_CASE("mass and zero-point motion") {
  const auto g = paper_geometry();
  const auto mode = drum_mode(g);
  const auto r = effective_mass_xzpf(g, mode.Omega_m);
  CHECK(std::abs(r.xi_mass / 0.269 - 1) < 0.01);
  CHECK(std::abs(r.m_eff / 2.3e-12 - 1) < 0.03);
  CHECK(std::abs(r.x_zpf / 1.4e-15 - 1) < 0.05);
  CHECK(r.m_phys == doctest::Approx(2700 * std::numbers::pi * 75e-6 * 75e-6 * 180e-9).epsilon(1e-14));
  CHECK(r.m_eff == doctest::Approx(r.xi_mass * r.m_phys).epsilon(1e-15));
  CHECK(2 * r.m_eff * angular(mode.Omega_m) * r.x_zpf * r.x_zpf == doctest::Approx(kHbar).epsilon(1e-13));
  // Riemann-sum oracle for the mass ratio.
  const double a = mode.shape.alpha, R = g.R;
  const double oracle =
      2 / (R * R) * riemann([&](double x) { const double u = std::cyl_bessel_j(0, a * x / R); return x * u * u; }, 0, R, 1000000);
  CHECK(r.xi_mass == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(mass_ratio([](double) { return 1.0; }, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coupling rate") {
  const auto g = paper_geometry();
  const auto r = g0_theory(g, 5.5e9);
  CHECK(std::abs(r.xi_cap / 0.93 - 1) < 0.01);
  const double a = bessel_zero(0, 1);
  const double oracle = 2 / (g.R_b * g.R_b) *
                        riemann([&](double x) { return x * std::cyl_bessel_j(0, a * x / g.R); }, 0, g.R_b, 1000000);
  CHECK(r.xi_cap == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(std::abs(r.g0 / 14 - 1) < 0.15);
  CHECK(r.closed_rel_diff < 0.02);
  auto g2 = g;
  g2.d *= 2;
  CHECK(g0_theory(g2, 5.5e9).g0 == doctest::Approx(r.g0 / 2).epsilon(1e-13));
  auto gm = g;
  gm.xi_par.reset();
  CHECK_OMECH_ERROR(g0_theory(gm, 5.5e9), ErrorCode::MissingParticipation);
}

TEST_CASE("dissipation dilution") {
  const auto g = paper_geometry();
  const auto d = dilution_factor(g);
  CHECK(d.lambda == doctest::Approx(180e-9 / 150e-6 * std::sqrt(75e9 / (12 * 350e6))).epsilon(1e-14));
  CHECK(d.lambda == doctest::Approx(5.07e-3).epsilon(2e-3));
  CHECK(std::abs(d.D_Q / 100 - 1) < 0.2);
  CHECK(d.Q_m == doctest::Approx(4e5 * d.D_Q).epsilon(1e-15));
  auto g0 = g;
  g0.A = 0;
  const auto inf = dilution_factor(g0);
  CHECK(std::isinf(inf.D_Q));
  CHECK(inf.warnings.size() == 1);
  auto gq = g;
  gq.A = 1 / (100 * d.lambda);
  CHECK(dilution_factor(gq).Q_m == doctest::Approx(4e7).epsilon(1e-12));
}

TEST_CASE("scaling rules") {
  const auto g = paper_geometry();
  const ModeContext ctx;
  SUBCASE("identity row") {
    const auto rows = scaling_sweep(g, SweepAxis::t, {1.0}, ctx);
    const auto base = compute_mode(g, ctx);
    for (const auto& col : mode_columns())
      CHECK(mode_quantity(rows[0].mode, col) == mode_quantity(base, col));
  }
  SUBCASE("thickness doubling quarters C0, R x4 gives Q_m x4") {
    const auto t = scaling_sweep(g, SweepAxis::t, {1.0, 2.0}, ctx);
    CHECK(t[1].mode.C0 / t[0].mode.C0 == doctest::Approx(0.25).epsilon(1e-12));
    const auto r = scaling_sweep(g, SweepAxis::R, {1.0, 4.0}, ctx);
    CHECK(r[1].mode.Q_m / r[0].mode.Q_m == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("log-log exponents match the table") {
    const std::vector<double> f = {0.5, 0.8, 1.0, 1.6, 2.5};
    for (auto axis : {SweepAxis::R, SweepAxis::sigma_m, SweepAxis::t, SweepAxis::d}) {
      const auto rows = scaling_sweep(g, axis, f, ctx);
      for (const char* q : {"Omega_m", "Gamma_m", "Q_m", "inv_Gamma_th", "g0", "C0"}) {
        // Least-squares slope in log space.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = rows.size();
        for (const auto& r : rows) {
          const double x = std::log(r.factor), y = std::log(mode_quantity(r.mode, q));
          sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK_MESSAGE(std::abs(slope - table_exponent(q, axis)) < 1e-6, q << " along " << to_string(axis));
      }
    }
  }
  SUBCASE("bad inputs") {
    CHECK_OMECH_ERROR(scaling_sweep(g, SweepAxis::R, {0.0}, ctx), ErrorCode::ConfigError);
    CHECK_OMECH_ERROR(sweep_axis_from_string("w"), ErrorCode::ConfigError);
    CHECK(sweep_axis_from_string("sigma") == SweepAxis::sigma_m);
  }
}

TEST_CASE("mode result invariants") {
  const auto m = compute_mode(paper_geometry(), ModeContext{});
  CHECK(m.Gamma_m == doctest::Approx(m.Omega_m / m.Q_m).epsilon(1e-15));
  CHECK(m.C0 == doctest::Approx(4 * m.g0 * m.g0 / (250e3 * m.Gamma_m)).epsilon(1e-14));
  CHECK(m.Gamma_th == doctest::Approx(kBoltzmann * 11e-3 * m.Gamma_m / (kPlanck * m.Omega_m)).epsilon(1e-14));
}
