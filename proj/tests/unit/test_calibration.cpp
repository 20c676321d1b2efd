#include <cmath>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "omech/calibration.hpp"
#include "omech/core.hpp"
#include "omech/dynamics.hpp"
#include "omech/fitting.hpp"
#include "omech/spectrum.hpp"

using namespace omech;
using namespace omech::calibration;

namespace {

// Central-difference derivative of the solved n_m with respect to one peak.
double dnm(ScaledPeaks p, double ScaledPeaks::*field, double h) {
  ScaledPeaks a = p, b = p;
  a.*field += h;
  b.*field -= h;
  return (asymmetry_solve(a).n_m - asymmetry_solve(b).n_m) / (2 * h);
}

std::vector<double> sweep_temperatures() { return testing::linspace(0.02, 0.16, 8); }

}  // namespace

TEST_CASE("asymmetry round trip") {
  for (auto [n, c, g] : {std::tuple{0.2, 0.05, 0.21}, std::tuple{0.05, 0.04, 0.21},
                         std::tuple{3.0, 0.0, 1.0}, std::tuple{0.125, 0.03, 0.8}}) {
    const auto r = asymmetry_solve(forward_peaks(n, c, g));
    CHECK(r.n_m == doctest::Approx(n).epsilon(1e-9));
    CHECK(std::abs(r.n_c - c) < 1e-12);
    CHECK(r.G_eta == doctest::Approx(g).epsilon(1e-9));
    CHECK_FALSE(r.negative_occupation);
  }
  // Dip regime: the pump sideband is negative but the solution stays exact.
  const auto dip = forward_peaks(0.05, 0.04, 0.21);
  CHECK(*dip.N_p < 0);
}

TEST_CASE("ideal asymmetry") {
  ScaledPeaks p;
  p.N_r = 1.0;
  p.N_b = 2.0;
  p.N_c = 0.0;
  const auto r = asymmetry_solve(p);
  CHECK(r.n_m == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.R_N() == 2.0);
  for (double n : {0.1, 0.5, 4.0}) {
    const auto f = forward_peaks(n, 0.0, 1.0);
    CHECK(f.R_N() == doctest::Approx((n + 1) / n));
  }
}

TEST_CASE("asymmetry is invariant under a common scale") {
  const auto base = forward_peaks(0.2, 0.05, 0.21);
  auto scaled = base;
  for (auto* x : {&*scaled.N_p, &*scaled.N_r, &scaled.N_b, &scaled.N_c}) *x *= 37.5;
  const auto a = asymmetry_solve(base), b = asymmetry_solve(scaled);
  CHECK(b.n_m == doctest::Approx(a.n_m).epsilon(1e-13));
  CHECK(b.n_c == doctest::Approx(a.n_c).epsilon(1e-12));
  CHECK(b.G_eta == doctest::Approx(37.5 * a.G_eta).epsilon(1e-13));
}

TEST_CASE("asymmetry uses the pump peak before the red probe") {
  auto p = forward_peaks(0.2, 0.05, 0.21);
  p.N_r = 123.0;
  CHECK(asymmetry_solve(p).n_m == doctest::Approx(0.2).epsilon(1e-9));
  p.N_p.reset();
  CHECK(asymmetry_solve(p).n_m != doctest::Approx(0.2));
}

TEST_CASE("asymmetry error propagation matches finite differences") {
  auto p = forward_peaks(0.2, 0.05, 0.21);
  p.N_r.reset();
  p.N_p_err = 0.002;
  p.N_b_err = 0.003;
  p.N_c_err = 0.001;
  const double h = 1e-6;
  const double a = dnm(p, &ScaledPeaks::N_b, h);
  const double c = dnm(p, &ScaledPeaks::N_c, h);
  ScaledPeaks pp = p, pm = p;
  *pp.N_p += h;
  *pm.N_p -= h;
  const double b = (asymmetry_solve(pp).n_m - asymmetry_solve(pm).n_m) / (2 * h);
  const double oracle = std::sqrt(b * b * 4e-6 + a * a * 9e-6 + c * c * 1e-6);
  CHECK(asymmetry_solve(p).n_m_err == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("added noise from the floor") {
  const auto p = forward_peaks(0.2, 0.05, 0.21, 1, 0.9, 0.8);
  const auto r = asymmetry_solve(p, 0.8);
  REQUIRE(r.n_add);
  CHECK(*r.n_add == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(*r.n_add_eff == doctest::Approx(*p.N_floor / 0.21 - 1).epsilon(1e-9));
  CHECK_FALSE(asymmetry_solve(p).n_add);
  CHECK_OMECH_ERROR(asymmetry_solve(p, 1.5), ErrorCode::ConfigError);
}

TEST_CASE("asymmetry failure modes") {
  ScaledPeaks p;
  p.N_r = 1.0;
  p.N_b = 1.0;
  p.N_c = 0.0;
  CHECK_OMECH_ERROR(asymmetry_solve(p), ErrorCode::SingularAsymmetry);
  ScaledPeaks none;
  none.N_b = 1;
  CHECK_OMECH_ERROR(asymmetry_solve(none), ErrorCode::ConfigError);
  // A red sideband far above the blue one implies a negative occupation.
  ScaledPeaks neg;
  neg.N_r = 1.0;
  neg.N_b = 3.0;
  neg.N_c = 1.0;
  const auto r = asymmetry_solve(neg);
  CHECK(r.negative_occupation);
  CHECK(r.warnings.size() >= 1);
}

TEST_CASE("flux scaling") {
  const double k = 250e3, Gp = 288, Gb = 15;
  const auto s = scale_fluxes(2.0, std::nullopt, 3.0, 4.0, Gp, std::nullopt, Gb, k);
  CHECK(*s.N_p == doctest::Approx(2.0 / angular(Gp)));
  CHECK(s.N_b == doctest::Approx(3.0 / angular(Gb)));
  CHECK(s.N_c == doctest::Approx(4.0 / angular(k)));
  CHECK_FALSE(s.N_r);
  CHECK_OMECH_ERROR(scale_fluxes(2.0, std::nullopt, 3.0, 4.0, std::nullopt, std::nullopt, Gb, k),
                    ErrorCode::ConfigError);
  CHECK_OMECH_ERROR(scale_fluxes(2.0, std::nullopt, 3.0, 4.0, Gp, std::nullopt, 0.0, k),
                    ErrorCode::NonPositiveRate);
}

TEST_CASE("probe-free occupations") {
  SUBCASE("dip semantics") {
    const auto r = probe_free_occupations(-0.001, 0.01, 0.21);
    CHECK(r.n_m < 2 * r.n_c);
    CHECK(r.n_m == doctest::Approx(-0.001 / 0.21 + 2 * 0.01 / 0.21));
  }
  SUBCASE("dip threshold") {
    const auto r = probe_free_occupations(0.0, 0.01, 0.21);
    CHECK(r.n_m == 2 * r.n_c);
  }
  SUBCASE("round trip with the cooling model") {
    const double n = dynamics::cooling_occupation(255, 0.03, 6400);
    CHECK(n == doctest::Approx(0.0698).epsilon(1e-3));
    const double G = 0.21;
    const auto r = probe_free_occupations(G * (n - 0.06), G * 0.03, G);
    CHECK(r.n_m == doctest::Approx(n).epsilon(1e-12));
    CHECK(r.n_c == doctest::Approx(0.03).epsilon(1e-12));
  }
  CHECK_OMECH_ERROR(probe_free_occupations(1, 1, 0), ErrorCode::ConfigError);
}

TEST_CASE("plateau average") {
  const std::vector<PlateauPoint> pts = {{1000, 5.0, 0.1}, {2000, 1.0, 0.1}, {4000, 2.0, 0.2}};
  const auto m = plateau_average(pts);
  CHECK(m.count == 2);
  CHECK(m.mean == doctest::Approx((1.0 / 0.01 + 2.0 / 0.04) / (1 / 0.01 + 1 / 0.04)));
  CHECK(m.err == doctest::Approx(1 / std::sqrt(1 / 0.01 + 1 / 0.04)));
  CHECK_OMECH_ERROR(plateau_average(pts, 1e5), ErrorCode::DegenerateDesign);
}

TEST_CASE("chain noise budget") {
  SUBCASE("reference chain") {
    ChainBudget in;
    in.snri_db = 11.3;
    in.n_add_H = 8.7;
    in.eta_T_db = 2.5;
    in.eta_db = 1.55;
    const auto b = chain_noise_budget(in);
    const double snri = std::pow(10, 1.13), etaT = std::pow(10, -0.25), eta = std::pow(10, -0.155);
    CHECK(b.n_add_T == doctest::Approx(9.7 / (etaT * snri) - 1).epsilon(1e-12));
    CHECK(b.total_background == doctest::Approx(9.7 / (eta * etaT * snri)).epsilon(1e-12));
    CHECK(std::abs(b.n_add_T / 0.3 - 1) < 0.1);
    CHECK(std::abs(b.total_background / 1.9 - 1) < 0.1);
  }
  SUBCASE("quantum-limited paramp") {
    ChainBudget in;
    in.n_add_H = 8.7;
    in.eta_T_db = 2.5;
    in.snri_db = linear_to_db(9.7 / db_to_linear(-2.5));
    CHECK(std::abs(chain_noise_budget(in).n_add_T) < 1e-12);
  }
  SUBCASE("HEMT-dominated chain") {
    ChainBudget in;
    in.n_add_H = 8.7;
    CHECK(chain_noise_budget(in).total_background == doctest::Approx(9.7));
  }
  SUBCASE("more improvement means less added noise") {
    ChainBudget in;
    in.n_add_H = 8.7;
    in.eta_T_db = 2.5;
    in.eta_db = 1.55;
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 0; s <= 11; s += 0.5) {
      in.snri_db = s;
      const double v = chain_noise_budget(in).n_add_T;
      CHECK(v < prev);
      prev = v;
    }
  }
  SUBCASE("inconsistent and invalid budgets") {
    ChainBudget in;
    in.n_add_H = 8.7;
    in.eta_T_db = 2.5;
    in.snri_db = 20;
    CHECK_OMECH_ERROR(chain_noise_budget(in), ErrorCode::InconsistentBudget);
    in.snri_db = 10;
    in.eta_db = -1;
    CHECK_OMECH_ERROR(chain_noise_budget(in), ErrorCode::ConfigError);
  }
  CHECK(db_to_linear(linear_to_db(3.7)) == doctest::Approx(3.7).epsilon(1e-15));
}

TEST_CASE("tone cancellation") {
  const double ln = std::log(10.0) / 20 * 0.125;
  const double oracle = 10 * std::log10(std::pow(std::numbers::pi / 360, 2) + ln * ln);
  CHECK(tone_cancellation_floor(std::numbers::pi / 360, 0.125) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(std::abs(tone_cancellation_floor(std::numbers::pi / 360, 0.125) + 35.5) < 0.05);
  CHECK(std::abs(tone_cancellation_floor(std::numbers::pi / 360, 0.125, 2) + 71) < 0.1);
  CHECK(tone_cancellation_floor(0, 0) == -std::numeric_limits<double>::infinity());
  CHECK_OMECH_ERROR(tone_cancellation_floor(0.1, 0.1, 0), ErrorCode::ConfigError);
}

TEST_CASE("phase noise requirement") {
  const auto p = paper_system_params();
  const auto r = phase_noise_requirement(p, 255, 0.1);
  CHECK(r.S_phiphi == doctest::Approx(p.g0 * p.g0 * 0.01 / (p.Omega_m * p.Omega_m * 255 * p.Gamma_m)));
  CHECK(std::abs(r.dbc_per_hz + 137) < 4);
  CHECK(phase_noise_requirement(p, 255, 1.0).dbc_per_hz - r.dbc_per_hz == doctest::Approx(20.0));
  auto p2 = p;
  p2.g0 *= 2;
  CHECK(phase_noise_requirement(p2, 255, 0.1).dbc_per_hz - r.dbc_per_hz ==
        doctest::Approx(20 * std::log10(2.0)));
  CHECK_OMECH_ERROR(phase_noise_requirement(p, 255, 0), ErrorCode::ConfigError);
}

TEST_CASE("g0 from a temperature sweep") {
  const auto p = paper_system_params();
  SweepSynthesis s;
  s.T = sweep_temperatures();
  SUBCASE("noiseless round trip") {
    const auto r = g0_from_sweep(synthesize_sweep(p, s), p, s.eta_att);
    CHECK(r.g0 == doctest::Approx(p.g0).epsilon(1e-9));
    double worst = 0;
    for (size_t i = 0; i < r.residuals.size(); ++i) worst = std::max(worst, std::abs(r.residuals[i] / r.ratio[i]));
    CHECK(worst < 1e-12);
    CHECK(std::abs(r.intercept) < 1e-9 * r.slope * 0.16);
    CHECK(r.warnings.empty());
    CHECK(r.n_th.size() == 8);
  }
  SUBCASE("ratio does not depend on gains or line loss") {
    auto s2 = s;
    s2.gain *= 2;
    s2.eta_att *= 2;
    const auto a = g0_from_sweep(synthesize_sweep(p, s), p, s.eta_att);
    const auto b = g0_from_sweep(synthesize_sweep(p, s2), p, s2.eta_att);
    CHECK(b.g0 == doctest::Approx(a.g0).epsilon(1e-13));
  }
  SUBCASE("unknown line loss falls back to the source power") {
    s.P_MW_src = 1e-18;
    const auto r = g0_from_sweep(synthesize_sweep(p, s), p);
    CHECK(r.warnings.size() == 1);
    CHECK(r.n_ba[0] == doctest::Approx(backaction_quanta(p, 1e-18)).epsilon(1e-9));
    s.P_MW_src = 1e-12;
    CHECK_OMECH_ERROR(g0_from_sweep(synthesize_sweep(p, s), p), ErrorCode::BackActionDominated);
  }
  SUBCASE("high-temperature occupation") {
    CHECK(high_temperature_occupation(0.1, 1.8e6) ==
          doctest::Approx(kBoltzmann * 0.1 / (kPlanck * 1.8e6)).epsilon(1e-14));
  }
  SUBCASE("back-action scales with pump power and g0 squared") {
    const double a = backaction_quanta(p, 1e-12);
    CHECK(backaction_quanta(p, 3e-12) == doctest::Approx(3 * a).epsilon(1e-14));
    auto q = p;
    q.g0 *= 2;
    CHECK(backaction_quanta(q, 1e-12) == doctest::Approx(4 * a).epsilon(1e-14));
  }
  SUBCASE("strong pump is rejected") {
    auto s2 = s;
    s2.P_MW_src = 1.0;
    s2.eta_att = 1.0;
    CHECK_OMECH_ERROR(g0_from_sweep(synthesize_sweep(p, s2), p, 1.0), ErrorCode::BackActionDominated);
  }
  SUBCASE("too few points") {
    s.T = {0.05, 0.1};
    CHECK_OMECH_ERROR(g0_from_sweep(synthesize_sweep(p, s), p), ErrorCode::DegenerateDesign);
  }
}

TEST_CASE("full loop from spectra through integration to occupations") {
  const auto p = paper_system_params();
  // n_c = 0.2 puts the pump sideband in the dip regime n_m < 2 n_c.
  for (double n_c : {0.03, 0.2}) {
    CAPTURE(n_c);
    BathOccupations b = make_baths(p, 0, 255);
    b.n_c = n_c;
    DriveSet d;
    d.add(DriveRole::CoolingPump, 0, 288);
    d.add(DriveRole::RedProbe, 40e3, 15);
    d.add(DriveRole::BlueProbe, 40e3, 15);
    const double Gt = dynamics::steady_state(p, b, d).gamma_tot;
    // Trapezoid over +-L plus the analytic Lorentzian tail beyond it.
    auto area = [&](dynamics::Component c, double centre, double width) {
      const double L = 4000 * width;
      const auto o = dynamics::output_psd(p, b, d, uniform_grid(centre, L, 800001), true);
      const double tail = 2 * std::atan(width / 2 / L) / std::numbers::pi;
      return fitting::integrate_peak(o.spectrum(c), o.floor) / (1 - tail);
    };
    const double Pp = area(dynamics::Component::Pump, 0, Gt);
    const double Pr = area(dynamics::Component::Red, -40e3, Gt);
    const double Pb = area(dynamics::Component::Blue, 40e3, Gt);
    const double Pc = area(dynamics::Component::Cavity, 0, p.kappa);
    if (n_c > 0.1) CHECK(Pp < 0);
    const auto r = asymmetry_solve(scale_fluxes(Pp, Pr, Pb, Pc, 288.0, 15.0, 15.0, p.kappa));
    const auto ss = dynamics::steady_state(p, b, d);
    CHECK(r.n_m == doctest::Approx(ss.occupations.n_m).epsilon(1e-6));
    CHECK(r.n_c == doctest::Approx(n_c).epsilon(1e-6));
    CHECK(r.G_eta == doctest::Approx(p.eta_kappa()).epsilon(1e-6));
  }
}

TEST_CASE("chain budget grows with the HEMT noise") {
  ChainBudget in;
  in.snri_db = 8;
  in.eta_T_db = 2.5;
  in.eta_db = 1.55;
  double prev = -1;
  for (double h = 5; h <= 20; h += 1) {
    in.n_add_H = h;
    const auto b = chain_noise_budget(in);
    CHECK(b.total_background > prev);
    prev = b.total_background;
  }
}
