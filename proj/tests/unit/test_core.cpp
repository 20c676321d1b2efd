#include <random>

#include "helpers.hpp"
#include "omech/core.hpp"

using namespace omech;

namespace {

RawSystemParams raw_paper() {
  RawSystemParams r;
  r.omega_c = 5.5e9;
  r.kappa_ex = 200e3;
  r.kappa_0 = 50e3;
  r.Omega_m = 1.8e6;
  r.Gamma_m = 0.045;
  r.g0 = 13.4;
  return r;
}

}  // namespace

TEST_CASE("parameter validation") {
  SUBCASE("derived linewidth and collection efficiency") {
    const auto p = validate_params(raw_paper());
    CHECK(p.kappa == doctest::Approx(250e3).epsilon(1e-15));
    CHECK(p.eta_kappa() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(p.sideband_resolution() == doctest::Approx(std::pow(250e3 / 7.2e6, 2)));
  }
  SUBCASE("lossless cavity") {
    auto r = raw_paper();
    r.kappa_0 = 0;
    CHECK(validate_params(r).eta_kappa() == 1.0);
  }
  SUBCASE("negative coupling rejected") {
    auto r = raw_paper();
    r.kappa_ex = -1;
    CHECK_OMECH_ERROR(validate_params(r), ErrorCode::NonPositiveRate);
  }
  SUBCASE("inconsistent linewidth rejected") {
    auto r = raw_paper();
    r.kappa = 251e3;
    CHECK_OMECH_ERROR(validate_params(r), ErrorCode::LinewidthMismatch);
    r.kappa = 250e3 * (1 + 1e-12);
    CHECK_NOTHROW(validate_params(r));
  }
  SUBCASE("reference parameters") {
    const auto p = paper_system_params();
    CHECK(p.kappa == 250e3);
    CHECK(p.Omega_m == 1.8e6);
    CHECK(p.g0 == 13.4);
  }
}

TEST_CASE("bath occupations") {
  const auto p = paper_system_params();
  const auto b = make_baths(p, 0.5, 255);
  CHECK(b.n_c == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(b.n_m == 255);
}

TEST_CASE("Bose occupation") {
  SUBCASE("base temperature at the mechanical frequency") {
    const double x = kPlanck * 1.8e6 / (kBoltzmann * 11e-3);
    CHECK(bose_occupation(1.8e6, 11e-3) == doctest::Approx(1 / std::expm1(x)).epsilon(1e-14));
    CHECK(bose_occupation(1.8e6, 11e-3) == doctest::Approx(126.9).epsilon(1e-3));
  }
  SUBCASE("zero temperature") { CHECK(bose_occupation(5e9, 0) == 0.0); }
  SUBCASE("high-temperature limit") {
    // n = 1/x - 1/2 + x/12 + O(x^3), so n + 1/2 tracks k_B T / h f within 1%.
    for (double x : {0.01, 0.05, 0.1, 0.14}) {
      const double T = kPlanck * 1e6 / (kBoltzmann * x);
      const double lin = kBoltzmann * T / (kPlanck * 1e6);
      const double n = bose_occupation(1e6, T);
      CHECK(std::abs((n + 0.5) / lin - 1) < 0.01);
      CHECK(n * x == doctest::Approx(1 - x / 2 + x * x / 12).epsilon(1e-5));
    }
  }
  SUBCASE("non-positive frequency") {
    CHECK_OMECH_ERROR(bose_occupation(0, 1), ErrorCode::NonPositiveFrequency);
  }
  SUBCASE("monotone in T and f") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lf(3, 10), lt(-3, 1);
    for (int i = 0; i < 500; ++i) {
      const double f = std::pow(10, lf(rng)), T = std::pow(10, lt(rng));
      CHECK(bose_occupation(f, T * 1.01) > bose_occupation(f, T));
      CHECK(bose_occupation(f * 1.01, T) < bose_occupation(f, T));
    }
  }
}

TEST_CASE("thermal decoherence rate") {
  CHECK(thermal_decoherence_rate(0.08, 255) == doctest::Approx(20.48));
  CHECK(thermal_decoherence_rate(0.08, 0) == 0.08);
  CHECK(thermal_decoherence_rate(0.045, 1e7) == doctest::Approx(4.5e5).epsilon(1e-6));
  CHECK(bath_occupation_from_rates(20.5, 0.08) == doctest::Approx(20.5 / 0.08 - 1));
  CHECK(bath_occupation_from_rates(20.5, 0.08) == doctest::Approx(255).epsilon(0.005));
}

TEST_CASE("drive set") {
  const auto p = paper_system_params();
  DriveSet d;
  d.add(DriveRole::CoolingPump, 0, 288);
  d.add(DriveRole::BlueProbe, 40e3, 15);
  CHECK(d.gamma_tot(p.Gamma_m) == doctest::Approx(0.045 + 288 - 15));
  CHECK(d.gamma(DriveRole::RedProbe) == 0.0);
  CHECK(p.cooperativity(288) == doctest::Approx(6400).epsilon(1e-12));
  CHECK(d.tones().size() == 2);
  CHECK_OMECH_ERROR(d.add(DriveRole::CoolingPump, 0, 1), ErrorCode::DuplicateDrive);

  DriveSet unstable;
  unstable.add(DriveRole::BlueProbe, 0, 1);
  CHECK_OMECH_ERROR(unstable.check_stable(p.Gamma_m), ErrorCode::UnstableDriveSet);

  CHECK(drive_role_from_string("cooling_pump") == DriveRole::CoolingPump);
  CHECK(drive_role_from_string("red") == DriveRole::RedProbe);
  CHECK(drive_role_from_string(to_string(DriveRole::BlueProbe)) == DriveRole::BlueProbe);
  CHECK_OMECH_ERROR(drive_role_from_string("green"), ErrorCode::ConfigError);
}
