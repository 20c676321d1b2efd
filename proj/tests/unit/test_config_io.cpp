#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "omech/cli.hpp"
#include "omech/config.hpp"
#include "omech/io.hpp"

using namespace omech;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "omech_unit_io";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("number parsing") {
  using config::parse_number;
  CHECK(parse_number("250k") == 250e3);
  CHECK(parse_number("5.5 GHz") == doctest::Approx(5.5e9).epsilon(1e-15));
  CHECK(parse_number("45 mHz") == doctest::Approx(0.045).epsilon(1e-15));
  CHECK(parse_number("1e-3") == 1e-3);
  CHECK(parse_number(" 75 um ") == doctest::Approx(75e-6).epsilon(1e-15));
  CHECK(parse_number("180nm") == doctest::Approx(180e-9).epsilon(1e-15));
  CHECK(parse_number("2 m") == doctest::Approx(2e-3).epsilon(1e-15));
  CHECK(parse_number("-2.5 dB") == -2.5);
  CHECK(parse_number("2700 kg/m3") == 2700);
  CHECK(parse_number("1.8MHz") == doctest::Approx(1.8e6).epsilon(1e-15));
  CHECK_OMECH_ERROR(parse_number("abc"), ErrorCode::ConfigError);
  CHECK_OMECH_ERROR(parse_number("3 parsecs"), ErrorCode::ConfigError);
  CHECK_OMECH_ERROR(parse_number(""), ErrorCode::ConfigError);
}

TEST_CASE("config parsing") {
  const std::string text =
      "# comment\n[a]\nx = 1k ; trailing\ny = 2, 3, 4\n\n[drives.pump]\ndelta = 0\ngamma_opt = 288\n";
  const auto c = config::Config::parse(text, "t.cfg");
  CHECK(c.get("a", "x") == 1000);
  CHECK(c.get_list("a", "y") == std::vector<double>{2, 3, 4});
  CHECK(c.get("a", "z", 7.0) == 7.0);
  CHECK_FALSE(c.find("a", "z"));
  CHECK(c.sections_with_prefix("drives.") == std::vector<std::string>{"drives.pump"});
  CHECK_OMECH_ERROR(c.get("a", "z"), ErrorCode::ConfigError);
  CHECK_OMECH_ERROR(c.section("nope"), ErrorCode::ConfigError);

  SUBCASE("duplicate keys name the line") {
    try {
      config::Config::parse("[a]\nx = 1\n\nx = 2\n", "dup.cfg");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find("dup.cfg:4") != std::string::npos);
    }
  }
  SUBCASE("malformed lines") {
    CHECK_OMECH_ERROR(config::Config::parse("x = 1\n"), ErrorCode::ConfigError);
    CHECK_OMECH_ERROR(config::Config::parse("[a\n"), ErrorCode::ConfigError);
    CHECK_OMECH_ERROR(config::Config::parse("[a]\njunk\n"), ErrorCode::ConfigError);
  }
  CHECK_OMECH_ERROR(config::Config::load("/nonexistent/omech.cfg"), ErrorCode::ConfigError);
}

TEST_CASE("built-in configuration reproduces the reference parameters") {
  const auto c = config::Config::parse(cli::paper_config_text(), "paper");
  const auto p = config::system_params(c);
  const auto q = paper_system_params();
  CHECK(p.omega_c == doctest::Approx(q.omega_c).epsilon(1e-15));
  CHECK(p.kappa == doctest::Approx(q.kappa).epsilon(1e-15));
  CHECK(p.kappa_ex == doctest::Approx(q.kappa_ex).epsilon(1e-15));
  CHECK(p.Omega_m == doctest::Approx(q.Omega_m).epsilon(1e-15));
  CHECK(p.Gamma_m == doctest::Approx(q.Gamma_m).epsilon(1e-15));
  CHECK(p.g0 == doctest::Approx(q.g0).epsilon(1e-15));
  const auto b = config::baths(c, p);
  CHECK(b.n_m_th == 255);
  CHECK(b.n_c == doctest::Approx(0.03));
  const auto d = config::drives(c);
  CHECK(d.gamma(DriveRole::CoolingPump) == 288);
  CHECK(d.delta(DriveRole::BlueProbe) == 40e3);
  const auto g = config::geometry(c);
  const auto ref = device::paper_geometry();
  CHECK(g.R == doctest::Approx(ref.R).epsilon(1e-15));
  CHECK(g.t == doctest::Approx(ref.t).epsilon(1e-15));
  CHECK(*g.xi_par == doctest::Approx(*ref.xi_par));
}

TEST_CASE("system parameters survive serialization") {
  const auto q = paper_system_params();
  std::string text = "[system]\n";
  for (auto [k, v] : {std::pair{"omega_c", q.omega_c}, {"kappa", q.kappa}, {"kappa_ex", q.kappa_ex},
                      {"kappa_0", q.kappa_0}, {"Omega_m", q.Omega_m}, {"Gamma_m", q.Gamma_m}, {"g0", q.g0}})
    text += std::string(k) + " = " + io::format_number(v) + "\n";
  const auto p = config::system_params(config::Config::parse(text));
  CHECK(p.omega_c == q.omega_c);
  CHECK(p.kappa == q.kappa);
  CHECK(p.kappa_ex == q.kappa_ex);
  CHECK(p.kappa_0 == q.kappa_0);
  CHECK(p.Omega_m == q.Omega_m);
  CHECK(p.Gamma_m == q.Gamma_m);
  CHECK(p.g0 == q.g0);
}

TEST_CASE("baths from temperature") {
  const auto c = config::Config::parse(
      "[system]\nomega_c = 5.5 GHz\nkappa_ex = 200k\nkappa_0 = 50k\nOmega_m = 1.8 MHz\n"
      "Gamma_m = 45 mHz\ng0 = 13.4\n[baths]\nT = 11 mK\n");
  const auto p = config::system_params(c);
  CHECK(config::baths(c, p).n_m_th == doctest::Approx(bose_occupation(1.8e6, 11e-3)));
  CHECK_OMECH_ERROR(config::baths(config::Config::parse("[baths]\nn_c = 1\n"), p), ErrorCode::ConfigError);
  CHECK_OMECH_ERROR(config::drives(config::Config::parse("[drives.violet]\ndelta = 0\ngamma_opt = 1\n")),
                    ErrorCode::ConfigError);
}

TEST_CASE("CSV round trip keeps every bit") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  io::CsvTable t;
  t.meta["note"] = "x";
  t.header = {"a", "b"};
  std::vector<std::vector<double>> values;
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> row = {u(rng) * std::pow(10.0, 30 * u(rng)), u(rng)};
    values.push_back(row);
    t.add_row(row);
  }
  t.add_row({std::numeric_limits<double>::denorm_min(), -0.0});
  const auto path = scratch("rt.csv");
  io::write_csv(path.string(), t);
  const auto r = io::read_csv(path.string());
  CHECK(r.meta.at("note") == "x");
  const auto a = r.numbers("a"), b = r.numbers("b");
  bool exact = true;
  for (size_t i = 0; i < values.size(); ++i) exact = exact && a[i] == values[i][0] && b[i] == values[i][1];
  CHECK(exact);
  CHECK(a.back() == std::numeric_limits<double>::denorm_min());
  CHECK(io::format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("CSV schema errors") {
  CHECK_OMECH_ERROR(io::parse_csv("a,b\n1,2,3\n"), ErrorCode::SchemaMismatch);
  CHECK_OMECH_ERROR(io::parse_csv("# only=meta\n"), ErrorCode::SchemaMismatch);
  const auto t = io::parse_csv("a,b\n1,x\n");
  try {
    t.numbers("b");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  CHECK_OMECH_ERROR(t.numbers("c"), ErrorCode::SchemaMismatch);
  CHECK_OMECH_ERROR(io::read_csv("/nonexistent/x.csv"), ErrorCode::ConfigError);
}

TEST_CASE("typed datasets") {
  SUBCASE("spectrum needs its resolution bandwidth") {
    CHECK_OMECH_ERROR(io::dataset_from_table(io::parse_csv("freq_Hz,value\n0,1\n1,2\n"), io::DatasetKind::Spectrum),
                      ErrorCode::SchemaMismatch);
    Spectrum s;
    s.freq = Eigen::ArrayXd::LinSpaced(5, -2, 2);
    s.values = s.freq.square() + 0.1;
    s.rbw = 1.0;
    s.label = "S_p";
    const auto back = std::get<Spectrum>(io::dataset_from_table(io::spectrum_table(s), io::DatasetKind::Spectrum));
    CHECK((back.freq == s.freq).all());
    CHECK((back.values == s.values).all());
    CHECK(back.rbw == 1.0);
    CHECK(back.label == "S_p");
  }
  SUBCASE("quadratures") {
    tomography::QuadratureBatch b = tomography::sample_quadratures(GaussianMechState::thermal(1), 1.13, 0.8, 50, 17);
    const auto path = scratch("q.csv");
    io::write_csv(path.string(), io::quadrature_table(b));
    const auto back = std::get<tomography::QuadratureBatch>(io::load_dataset(path.string(), io::DatasetKind::Quadratures));
    CHECK(back.samples == b.samples);
    CHECK(back.g_opt == 1.13);
    CHECK(back.n_add_opt == 0.8);
    CHECK(back.seed == 17);
  }
  SUBCASE("peaks") {
    const auto t = io::parse_csv("component,N,N_err\np,0.01,0.001\nb,0.3,0.002\nc,0.006,0.0005\nfloor,0.5,0\n");
    const auto p = std::get<calibration::ScaledPeaks>(io::dataset_from_table(t, io::DatasetKind::Peaks));
    CHECK(*p.N_p == 0.01);
    CHECK(p.N_b == 0.3);
    CHECK(p.N_c == 0.006);
    CHECK(p.N_b_err == 0.002);
    CHECK(*p.N_floor == 0.5);
    CHECK_FALSE(p.N_r);
    CHECK_OMECH_ERROR(io::dataset_from_table(io::parse_csv("component,N\np,1\nc,1\n"), io::DatasetKind::Peaks),
                      ErrorCode::SchemaMismatch);
    CHECK_OMECH_ERROR(io::dataset_from_table(io::parse_csv("component,N\np,1\nb,1\nc,1\nq,2\n"), io::DatasetKind::Peaks),
                      ErrorCode::SchemaMismatch);
  }
  SUBCASE("sweep and calibration") {
    const auto sweep = calibration::synthesize_sweep(paper_system_params(), {{0.02, 0.05, 0.1}});
    const auto back = std::get<std::vector<calibration::SweepPoint>>(
        io::dataset_from_table(io::sweep_table(sweep), io::DatasetKind::Sweep));
    REQUIRE(back.size() == 3);
    CHECK(back[2].P_SB_meas == sweep[2].P_SB_meas);
    const auto cal = std::get<std::vector<tomography::CalibrationPoint>>(
        io::dataset_from_table(io::parse_csv("n_m,sigma2_uV2\n0.1,2.1\n1,3.1\n"), io::DatasetKind::Calibration));
    CHECK(cal.size() == 2);
    CHECK(cal[1].sigma2 == 3.1);
  }
  SUBCASE("rates") {
    const auto r = std::get<squeezing::DecoherenceRates>(io::dataset_from_table(
        io::parse_csv("Gamma_sq_Hz,Gamma_asq_Hz\n10,30\n"), io::DatasetKind::Rates));
    CHECK(r.Gamma_sq == 10);
    CHECK(r.Gamma_asq == 30);
    CHECK_OMECH_ERROR(io::dataset_from_table(io::parse_csv("Gamma_sq_Hz,Gamma_asq_Hz\n10,30\n1,2\n"),
                                             io::DatasetKind::Rates),
                      ErrorCode::SchemaMismatch);
  }
  CHECK(io::dataset_kind_from_string("sweep") == io::DatasetKind::Sweep);
  CHECK_OMECH_ERROR(io::dataset_kind_from_string("movie"), ErrorCode::ConfigError);
}

TEST_CASE("JSON and manifests") {
  io::RunManifest m;
  m.command = "cool";
  m.seed = 7;
  m.outputs = {"a.json"};
  m.version = "0.1.0";
  m.timestamp = io::utc_timestamp();
  const auto j = m.to_json();
  CHECK(j["command"] == "cool");
  CHECK(j["seed"] == 7);
  const auto path = scratch("m.json");
  io::write_json(path.string(), j);
  CHECK(io::read_json(path.string()) == j);
  CHECK(m.timestamp.size() == 20);
  CHECK(m.timestamp.back() == 'Z');
}
