#include "omech/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "omech/acceptance.hpp"
#include "omech/calibration.hpp"
#include "omech/config.hpp"
#include "omech/core.hpp"
#include "omech/device.hpp"
#include "omech/dynamics.hpp"
#include "omech/error.hpp"
#include "omech/io.hpp"
#include "omech/squeezing.hpp"
#include "omech/tomography.hpp"

namespace omech::cli {

namespace fs = std::filesystem;
using io::Json;

const std::string& paper_config_text() {
  static const std::string text = R"(# Reference device, drives and readout chain.
[system]
omega_c = 5.5 GHz
kappa_ex = 200 kHz
kappa_0 = 50 kHz
Omega_m = 1.8 MHz
Gamma_m = 45 mHz
g0 = 13.4 Hz

[baths]
n_m_th = 255
n_c = 0.03

[drives.pump]
delta = 0
gamma_opt = 288

[drives.red]
delta = 40 kHz
gamma_opt = 15

[drives.blue]
delta = 40 kHz
gamma_opt = 15

[geometry]
R = 75 um
R_b = 23 um
t = 180 nm
d = 180 nm
rho = 2700 kg/m3
sigma = 350 MPa
Y = 75 GPa
xi_par = 0.8
Q_0 = 4e5

[context]
omega_c = 5.5 GHz
kappa = 250 kHz
T_bath = 11 mK

[amplifier]
gamma_opt_b = 85.045
tau = 22 ms
dt = 10 us
chain_gain = 1
n_add_H = 0.8

[state]
n_th = 0.4
r = 0.6
theta = 0

[thermalize]
Gamma_th = 20.5
Gamma_m = 0.08
t_max = 2 ms
points = 401
samples = 12000
g_opt = 1.13
n_add_opt = 0.8

[squeeze]
gamma_r = 100
ratio_db = -5
n_m_th = 255
C = 2000

[dephase]
n_th = 0.4
r = 0.6
Gamma_th = 17.1
delta = 1.1
delta_err = 0.6

[sweep]
T = 20 mK, 40 mK, 60 mK, 80 mK, 100 mK, 120 mK, 140 mK, 160 mK
noise = 0.1
eta_att = 1e-6

[chain]
snri_db = 11.3
n_add_H = 8.7
eta_T_db = 2.5
eta_db = 1.55

[tone]
delta_phi = 0.008726646259971648
delta_att_db = 0.125
branches = 2

[limits]
n_m_th = 255
n_min = 0.1
n_c = 0.03
C = 6400
)";
  return text;
}

namespace {

// Output bookkeeping for one invocation. Files are written eagerly; the
// manifest listing them is written last.
class Run {
 public:
  Run(std::string command, const std::string& out, std::string config_path)
      : primary_(resolve(out)) {
    manifest_.command = std::move(command);
    manifest_.config_path = std::move(config_path);
    manifest_.version = kVersion;
    manifest_path_ = primary_;
    manifest_path_.replace_extension(".manifest.json");
    if (primary_.has_parent_path()) fs::create_directories(primary_.parent_path());
  }

  static fs::path resolve(const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) {
      if (const char* dir = std::getenv("OMECH_OUTPUT_DIR"); dir && *dir) path = fs::path(dir) / path;
    }
    return path;
  }

  const fs::path& primary() const { return primary_; }
  fs::path sibling(const std::string& suffix) const {
    fs::path p = primary_;
    p.replace_extension(suffix);
    return p;
  }

  io::RunManifest& manifest() { return manifest_; }

  void csv(const fs::path& path, io::CsvTable t) {
    t.meta["manifest"] = manifest_path_.filename().string();
    io::write_csv(path.string(), t);
    record(path);
  }

  void json(const fs::path& path, Json j) {
    j["manifest"] = manifest_path_.filename().string();
    io::write_json(path.string(), j);
    record(path);
  }

  void finish() {
    manifest_.timestamp = io::utc_timestamp();
    io::write_json(manifest_path_.string(), manifest_.to_json());
    std::printf("manifest %s\n", manifest_path_.string().c_str());
  }

 private:
  void record(const fs::path& p) {
    manifest_.outputs.push_back(p.string());
    std::printf("wrote %s\n", p.string().c_str());
  }

  fs::path primary_;
  fs::path manifest_path_;
  io::RunManifest manifest_;
};

struct Common {
  std::string config;
  bool paper = false;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string input;
};

config::Config load_config(const Common& c) {
  if (!c.config.empty()) return config::Config::load(c.config);
  if (c.paper) return config::Config::parse(paper_config_text(), "<paper-params>");
  throw Error(ErrorCode::ConfigError, "needs --config FILE or --paper-params");
}

std::string config_label(const Common& c) { return c.config.empty() ? "<paper-params>" : c.config; }

Json config_snapshot(const config::Config& cfg) {
  Json j = Json::object();
  for (const auto& name : cfg.sections_with_prefix("")) {
    Json s = Json::object();
    for (const auto& [k, v] : cfg.section(name)) s[k] = v;
    j[name] = s;
  }
  return j;
}

std::uint64_t require_seed(const Common& c, const char* what) {
  if (!c.seed)
    throw Error(ErrorCode::ConfigError, std::string(what) + " is stochastic and needs --seed");
  return *c.seed;
}

Json warnings_json(const std::vector<std::string>& w) { return Json(w); }

Run start(const char* command, const Common& c, const config::Config* cfg) {
  Run out(command, c.out, config_label(c));
  if (cfg) out.manifest().parameters = config_snapshot(*cfg);
  out.manifest().seed = c.seed;
  if (!c.input.empty()) out.manifest().inputs.push_back(c.input);
  return out;
}

// ---- subcommands ----

int cmd_device(const Common& c) {
  const auto cfg = load_config(c);
  const auto g = config::geometry(cfg);
  const auto ctx = cfg.has_section("context") ? config::mode_context(cfg) : device::ModeContext{};
  std::vector<double> factors = {1.0};
  std::optional<device::SweepAxis> axis;
  if (cfg.has("device", "sweep")) {
    axis = device::sweep_axis_from_string(cfg.get_string("device", "sweep"));
    factors = cfg.get_list("device", "factors");
  }
  io::CsvTable t;
  t.header = {"factor"};
  for (const auto& col : device::mode_columns()) t.header.push_back(col);
  std::vector<device::SweepRow> rows;
  if (axis) {
    rows = device::scaling_sweep(g, *axis, factors, ctx);
    t.meta["sweep"] = device::to_string(*axis);
  } else {
    rows.push_back({1.0, g, device::compute_mode(g, ctx)});
  }
  for (const auto& r : rows) {
    std::vector<double> v = {r.factor};
    for (const auto& col : device::mode_columns()) v.push_back(device::mode_quantity(r.mode, col));
    t.add_row(v);
  }
  Run out = start("device", c, &cfg);
  out.csv(out.primary(), t);
  const auto& m = rows.front().mode;
  std::printf("Omega_m = %.6g Hz, m_eff = %.4g kg, x_zpf = %.4g m, g0 = %.4g Hz, D_Q = %.4g\n",
              m.Omega_m, m.m_eff, m.x_zpf, m.g0, m.D_Q);
  out.finish();
  return 0;
}

int cmd_psd(const Common& c) {
  const auto cfg = load_config(c);
  const auto p = config::system_params(cfg);
  const auto b = config::baths(cfg, p);
  const auto d = config::drives(cfg);
  const double center = cfg.get("psd", "center", 0.0);
  const double half = cfg.get("psd", "half_width", 5 * p.kappa);
  const auto points = static_cast<Eigen::Index>(cfg.get("psd", "points", 2001));
  const bool simplified = cfg.get("psd", "simplified", 0.0) != 0;
  if (points < 3) throw Error(ErrorCode::ConfigError, "[psd] points must be >= 3");
  const auto freq = uniform_grid(center, half, points);
  const auto psd = dynamics::output_psd(p, b, d, freq, simplified);
  io::CsvTable t = io::spectrum_table(psd.total_spectrum());
  t.header = {"freq_Hz", "value", "S_c", "S_p", "S_r", "S_b"};
  t.rows.clear();
  for (Eigen::Index i = 0; i < freq.size(); ++i)
    t.add_row({freq[i], psd.floor + psd.S_c[i] + psd.S_p[i] + psd.S_r[i] + psd.S_b[i], psd.S_c[i],
               psd.S_p[i], psd.S_r[i], psd.S_b[i]});
  t.meta["n_m"] = io::format_number(psd.n_m);
  t.meta["n_c"] = io::format_number(psd.n_c);
  t.meta["gamma_tot_Hz"] = io::format_number(psd.gamma_tot);
  Run out = start("psd", c, &cfg);
  out.csv(out.primary(), t);
  for (const auto& w : psd.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("n_m = %.6g, gamma_tot = %.6g Hz\n", psd.n_m, psd.gamma_tot);
  out.finish();
  return 0;
}

int cmd_cool(const Common& c) {
  const auto cfg = load_config(c);
  const auto p = config::system_params(cfg);
  const auto b = config::baths(cfg, p);
  const auto d = config::drives(cfg);
  const auto ss = dynamics::steady_state(p, b, d);
  Json j;
  j["n_m"] = ss.occupations.n_m;
  j["n_c"] = ss.occupations.n_c;
  j["n_m_th"] = ss.occupations.n_m_th;
  j["gamma_tot_Hz"] = ss.gamma_tot;
  Json tones = Json::array();
  for (const auto& t : d.tones())
    tones.push_back({{"role", std::string(to_string(t.role))},
                     {"delta_Hz", t.delta},
                     {"gamma_opt_Hz", t.gamma_opt},
                     {"cooperativity", p.cooperativity(t.gamma_opt)}});
  j["drives"] = tones;
  if (d.has(DriveRole::CoolingPump)) {
    const double C = p.cooperativity(d.gamma(DriveRole::CoolingPump));
    j["pump_only_n_m"] = dynamics::cooling_occupation(b.n_m_th, b.n_c, C);
  }
  if (cfg.has("cool", "C")) {
    Json curve = Json::array();
    for (double C : cfg.get_list("cool", "C"))
      curve.push_back({{"C", C}, {"n_m", dynamics::cooling_occupation(b.n_m_th, b.n_c, C)}});
    j["curve"] = curve;
  }
  j["warnings"] = warnings_json(ss.warnings);
  Run out = start("cool", c, &cfg);
  out.json(out.primary(), j);
  std::printf("n_m = %.6g quanta\n", ss.occupations.n_m);
  out.finish();
  return 0;
}

int cmd_asymmetry(const Common& c, std::optional<double> eta_kappa) {
  if (c.input.empty()) throw Error(ErrorCode::ConfigError, "asymmetry needs --input peaks.csv");
  const auto peaks = std::get<calibration::ScaledPeaks>(io::load_dataset(c.input, io::DatasetKind::Peaks));
  std::optional<config::Config> cfg;
  if (!c.config.empty() || c.paper) cfg = load_config(c);
  if (!eta_kappa && cfg && cfg->has_section("system")) eta_kappa = config::system_params(*cfg).eta_kappa();
  const auto r = calibration::asymmetry_solve(peaks, eta_kappa);
  Json j;
  j["n_m"] = r.n_m;
  j["n_m_err"] = r.n_m_err;
  j["n_c"] = r.n_c;
  j["n_c_err"] = r.n_c_err;
  j["G_eta"] = r.G_eta;
  j["G_eta_err"] = r.G_eta_err;
  j["n_add"] = r.n_add ? Json(*r.n_add) : Json(nullptr);
  j["n_add_eff"] = r.n_add_eff ? Json(*r.n_add_eff) : Json(nullptr);
  j["negative_occupation"] = r.negative_occupation;
  j["warnings"] = warnings_json(r.warnings);
  Run out = start("asymmetry", c, cfg ? &*cfg : nullptr);
  out.json(out.primary(), j);
  std::printf("n_m = %.6g +/- %.3g, n_c = %.6g +/- %.3g\n", r.n_m, r.n_m_err, r.n_c, r.n_c_err);
  out.finish();
  return 0;
}

int cmd_amplify(const Common& c, std::optional<long> samples) {
  const auto cfg = load_config(c);
  Json j;
  Run out = start("amplify", c, &cfg);
  if (!c.input.empty()) {
    const auto pts = std::get<std::vector<tomography::CalibrationPoint>>(
        io::load_dataset(c.input, io::DatasetKind::Calibration));
    const auto cal = tomography::calibrate_amplifier(pts);
    j["calibration"] = {{"g_opt", cal.g_opt},         {"g_opt_err", cal.g_opt_err},
                        {"n_add_opt", cal.n_add_opt}, {"n_add_opt_err", cal.n_add_opt_err},
                        {"chi2", cal.chi2},           {"dof", cal.dof},
                        {"warnings", cal.warnings}};
    std::printf("G_opt = %.4g +/- %.2g, n_add_opt = %.4g +/- %.2g\n", cal.g_opt, cal.g_opt_err,
                cal.n_add_opt, cal.n_add_opt_err);
  } else {
    const auto p = config::system_params(cfg);
    const auto b = config::baths(cfg, p);
    const std::string s = "amplifier";
    const auto spec = tomography::AmplifierSpec::from_rates(
        cfg.get(s, "gamma_opt_b"), p.Gamma_m, cfg.get(s, "tau"), cfg.get(s, "dt"),
        cfg.get(s, "eta_kappa", p.eta_kappa()), cfg.get(s, "chain_gain", 1.0),
        cfg.get(s, "n_add_H", 0.0));
    const auto mf = tomography::matched_filter(spec);
    const auto budget = tomography::predict_added_noise(spec, p, b);
    const auto ro = tomography::readout_from_spec(spec, p, b);
    Json ranked = Json::array();
    for (const auto& t : budget.ranked) ranked.push_back({{"name", t.name}, {"value", t.value}});
    j["gain"] = mf.gain;
    j["gain_db"] = mf.gain_db;
    j["added_noise"] = {{"cavity_internal", budget.cavity_internal},
                        {"thermal_decoherence", budget.thermal_decoherence},
                        {"chain", budget.chain},
                        {"total", budget.total},
                        {"measurement_noise", budget.measurement_noise()},
                        {"ranked", ranked},
                        {"warnings", budget.warnings}};
    j["readout"] = {{"g_opt", ro.g_opt}, {"n_add_opt", ro.n_add_opt}};
    std::printf("gain = %.4g dB, n_add = %.4g quanta\n", mf.gain_db, budget.total);
    if (samples) {
      const std::uint64_t seed = require_seed(c, "quadrature sampling");
      const auto st = GaussianMechState::squeezed_thermal(
          cfg.get("state", "n_th", 0.0), cfg.get("state", "r", 0.0), cfg.get("state", "theta", 0.0));
      const auto batch = tomography::sample_quadratures(st, ro.g_opt, ro.n_add_opt, *samples, seed);
      const auto est = tomography::estimate_state(batch);
      j["estimate"] = {{"n_m", est.n_m},           {"n_m_err", est.n_m_err},
                       {"var_sq", est.var_sq},     {"var_asq", est.var_asq},
                       {"var_sq_db", est.var_sq_db}, {"var_asq_db", est.var_asq_db},
                       {"warnings", est.warnings}};
      out.csv(out.sibling(".quadratures.csv"), io::quadrature_table(batch));
    }
  }
  out.json(out.primary(), j);
  out.finish();
  return 0;
}

int cmd_thermalize(const Common& c) {
  const auto cfg = load_config(c);
  const std::uint64_t seed = require_seed(c, "thermalize");
  const std::string s = "thermalize";
  tomography::FreeEvolutionConfig fe;
  fe.Gamma_th = cfg.get(s, "Gamma_th");
  fe.Gamma_m = cfg.get(s, "Gamma_m");
  fe.Gamma_phi = cfg.get(s, "Gamma_phi", 0.0);
  fe.t_short = cfg.get(s, "t_short", 2e-3);
  const double t_max = cfg.get(s, "t_max", 2e-3);
  const int points = static_cast<int>(cfg.get(s, "points", 401));
  const auto N = static_cast<Eigen::Index>(cfg.get(s, "samples", 12000));
  if (points < 2) throw Error(ErrorCode::ConfigError, "[thermalize] points must be >= 2");
  const tomography::Readout ro{cfg.get(s, "g_opt", 1.0), cfg.get(s, "n_add_opt", 0.0)};
  GaussianMechState prep = GaussianMechState::vacuum();
  if (cfg.get(s, "from_state", 0.0) != 0)
    prep = GaussianMechState::squeezed_thermal(cfg.get("state", "n_th"), cfg.get("state", "r", 0.0),
                                               cfg.get("state", "theta", 0.0));
  std::vector<double> times(points);
  for (int i = 0; i < points; ++i) times[i] = t_max * i / (points - 1);
  const auto res = tomography::free_evolution_experiment(prep, fe, times, ro, N, seed);

  io::CsvTable t;
  t.header = {"t_s", "n", "n_err", "n_true", "Xsq2", "Xasq2"};
  for (size_t i = 0; i < times.size(); ++i) {
    const auto& e = res.estimates[i];
    t.add_row({times[i], e.n_m, e.n_m_err, res.truth[i].n, e.var_sq, e.var_asq});
  }
  Json j;
  j["slope_Hz"] = res.fit.slope;
  j["slope_err_Hz"] = res.fit.slope_err;
  j["T1_s"] = res.fit.T1;
  j["n_eq"] = res.fit.n_eq;
  j["n_eq_err"] = res.fit.n_eq_err;
  j["n0"] = res.fit.n0;
  j["n0_err"] = res.fit.n0_err;
  Run out = start("thermalize", c, &cfg);
  out.csv(out.sibling(".csv"), t);
  out.json(out.primary(), j);
  std::printf("slope = %.4g +/- %.2g Hz, T1 = %.4g ms\n", res.fit.slope, res.fit.slope_err,
              res.fit.T1 * 1e3);
  out.finish();
  return 0;
}

int cmd_squeeze(const Common& c) {
  const auto cfg = load_config(c);
  const std::string s = "squeeze";
  const double gamma_r = cfg.get(s, "gamma_r");
  const auto drive = cfg.has(s, "ratio_db")
                         ? squeezing::SqueezeDrive::from_ratio_db(gamma_r, cfg.get(s, "ratio_db"))
                         : squeezing::SqueezeDrive{gamma_r, cfg.get(s, "gamma_b")};
  double kappa = cfg.get(s, "kappa", 0.0);
  if (kappa == 0 && cfg.has_section("system")) kappa = config::system_params(cfg).kappa;
  const auto tgt = squeezing::squeeze_target(drive, kappa);
  Json j;
  j["r"] = tgt.r;
  j["var_sq"] = tgt.var_sq;
  j["var_asq"] = tgt.var_asq;
  j["var_sq_db"] = tgt.var_sq_db;
  j["var_asq_db"] = tgt.var_asq_db;
  j["coupling_G_Hz"] = tgt.coupling_G;
  j["ratio_db"] = tgt.ratio_db;
  if (cfg.has(s, "n_m_th") && cfg.has(s, "C"))
    j["limit_db"] = squeezing::squeezing_limit(cfg.get(s, "n_m_th"), cfg.get(s, "C"));
  Run out = start("squeeze", c, &cfg);
  if (cfg.has_section("evolve")) {
    const std::string e = "evolve";
    squeezing::DephasingModel m;
    m.Gamma_th = cfg.get(e, "Gamma_th");
    m.Gamma_phi = cfg.get(e, "Gamma_phi", 0.0);
    m.initial = GaussianMechState::squeezed_thermal(cfg.get(e, "n_th", 0.0), tgt.r);
    const double t_max = cfg.get(e, "t_max", 5e-3);
    const int points = static_cast<int>(cfg.get(e, "points", 11));
    if (points < 2) throw Error(ErrorCode::ConfigError, "[evolve] points must be >= 2");
    std::vector<double> times(points);
    for (int i = 0; i < points; ++i) times[i] = t_max * i / (points - 1);
    const std::string solver = cfg.has(e, "solver") ? cfg.get_string(e, "solver") : "moments";
    squeezing::Trajectory tr;
    if (solver == "moments") {
      tr = squeezing::moments_evolve(m, times);
    } else if (solver == "lindblad") {
      const auto lr = squeezing::lindblad_evolve(m, times);
      tr = lr.trajectory;
      j["lindblad"] = {{"dim", lr.dim},
                       {"max_trace_error", lr.max_trace_error},
                       {"min_eigenvalue", lr.min_eigenvalue},
                       {"top_population", lr.top_population}};
    } else {
      throw Error(ErrorCode::ConfigError, "[evolve] solver must be moments or lindblad");
    }
    const auto rates = squeezing::rates_from_trajectory(tr, t_max);
    j["rates"] = {{"Gamma_sq_Hz", rates.Gamma_sq},
                  {"Gamma_asq_Hz", rates.Gamma_asq},
                  {"delta_Hz", rates.delta}};
    out.csv(out.sibling(".csv"), io::trajectory_table(tr));
  }
  out.json(out.primary(), j);
  std::printf("r = %.4g, squeezed %.4g dB, anti-squeezed %.4g dB\n", tgt.r, tgt.var_sq_db,
              tgt.var_asq_db);
  out.finish();
  return 0;
}

int cmd_dephase(const Common& c, const std::string& kind) {
  const auto cfg = load_config(c);
  const std::string s = "dephase";
  const SqueezedThermal init{cfg.get(s, "n_th"), cfg.get(s, "r"), cfg.get(s, "theta", 0.0)};
  squeezing::DephasingOptions o;
  o.window = cfg.get(s, "window", o.window);
  std::optional<squeezing::StateUncertainty> se;
  if (cfg.has(s, "n_th_err") || cfg.has(s, "r_err"))
    se = squeezing::StateUncertainty{cfg.get(s, "n_th_err", 0.0), cfg.get(s, "r_err", 0.0)};
  squeezing::DephasingResult r;
  if (c.input.empty()) {
    r = squeezing::extract_dephasing(cfg.get(s, "delta"), cfg.get(s, "delta_err", 0.0), init,
                                     cfg.get(s, "Gamma_th"), o, se);
  } else if (kind == "rates") {
    const auto rates = std::get<squeezing::DecoherenceRates>(io::load_dataset(c.input, io::DatasetKind::Rates));
    r = squeezing::extract_dephasing(rates.delta, rates.delta_err, init,
                                     cfg.get(s, "Gamma_th", rates.Gamma_th_est), o, se);
  } else if (kind == "trajectory") {
    const auto tr = std::get<squeezing::Trajectory>(io::load_dataset(c.input, io::DatasetKind::Trajectory));
    r = squeezing::extract_dephasing(tr, init, o, se);
  } else {
    throw Error(ErrorCode::ConfigError, "--kind must be rates or trajectory");
  }
  Json j;
  j["Gamma_phi_Hz"] = r.Gamma_phi;
  j["lo_Hz"] = r.lo;
  j["hi_Hz"] = r.hi;
  io::CsvTable t;
  t.header = {"Gamma_phi_Hz", "delta_Hz"};
  for (const auto& [g, d] : r.curve) t.add_row({g, d});
  Run out = start("dephase", c, &cfg);
  out.csv(out.sibling(".curve.csv"), t);
  out.json(out.primary(), j);
  std::printf("Gamma_phi = %.4g Hz, interval [%.4g, %.4g]\n", r.Gamma_phi, r.lo, r.hi);
  out.finish();
  return 0;
}

int cmd_g0fit(const Common& c, bool synthesize) {
  const auto cfg = load_config(c);
  const auto p = config::system_params(cfg);
  const std::optional<double> eta_att = cfg.find("sweep", "eta_att");
  std::vector<calibration::SweepPoint> sweep;
  Run out = start("g0fit", c, &cfg);
  if (synthesize) {
    calibration::SweepSynthesis syn;
    syn.T = cfg.get_list("sweep", "T");
    syn.noise = cfg.get("sweep", "noise", 0.0);
    syn.P_MW_src = cfg.get("sweep", "P_MW_src", syn.P_MW_src);
    syn.P_cal_src = cfg.get("sweep", "P_cal_src", syn.P_cal_src);
    syn.gain = cfg.get("sweep", "gain", syn.gain);
    if (eta_att) syn.eta_att = *eta_att;
    syn.seed = syn.noise > 0 ? require_seed(c, "noisy sweep synthesis") : c.seed.value_or(0);
    sweep = calibration::synthesize_sweep(p, syn);
    out.csv(out.sibling(".sweep.csv"), io::sweep_table(sweep));
  } else {
    if (c.input.empty()) throw Error(ErrorCode::ConfigError, "g0fit needs --input sweep.csv or --synthesize");
    sweep = std::get<std::vector<calibration::SweepPoint>>(io::load_dataset(c.input, io::DatasetKind::Sweep));
  }
  const auto fit = calibration::g0_from_sweep(sweep, p, eta_att);
  Json j;
  j["g0_Hz"] = fit.g0;
  j["g0_err_Hz"] = fit.g0_err;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["ratio"] = fit.ratio;
  j["residuals"] = fit.residuals;
  j["n_th"] = fit.n_th;
  j["n_ba"] = fit.n_ba;
  j["warnings"] = warnings_json(fit.warnings);
  out.json(out.primary(), j);
  for (const auto& w : fit.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("g0 = %.4g +/- %.2g Hz\n", fit.g0, fit.g0_err);
  out.finish();
  return 0;
}

int cmd_budget(const Common& c) {
  const auto cfg = load_config(c);
  Json j;
  if (!cfg.has_section("chain") && !cfg.has_section("tone"))
    throw Error(ErrorCode::ConfigError, "budget needs a [chain] or [tone] section");
  if (cfg.has_section("chain")) {
    calibration::ChainBudget in;
    in.snri_db = cfg.get("chain", "snri_db");
    in.n_add_H = cfg.get("chain", "n_add_H");
    in.eta_T_db = cfg.get("chain", "eta_T_db");
    in.eta_db = cfg.get("chain", "eta_db");
    in.G_T_db = cfg.get("chain", "G_T_db", 0.0);
    const auto b = calibration::chain_noise_budget(in);
    j["chain"] = {{"n_add_T", b.n_add_T}, {"total_background", b.total_background},
                  {"warnings", b.warnings}};
    std::printf("n_add_T = %.4g, 1 + n_add = %.4g\n", b.n_add_T, b.total_background);
  }
  if (cfg.has_section("tone")) {
    const int branches = static_cast<int>(cfg.get("tone", "branches", 1));
    const double db = calibration::tone_cancellation_floor(cfg.get("tone", "delta_phi"),
                                                           cfg.get("tone", "delta_att_db"), branches);
    j["tone"] = {{"branches", branches}, {"cancellation_db", db}};
    std::printf("tone cancellation = %.4g dB over %d branch(es)\n", db, branches);
  }
  Run out = start("budget", c, &cfg);
  out.json(out.primary(), j);
  out.finish();
  return 0;
}

int cmd_limits(const Common& c) {
  const auto cfg = load_config(c);
  const auto p = config::system_params(cfg);
  const std::string s = "limits";
  const double n_th = cfg.get(s, "n_m_th");
  Json j;
  if (cfg.has(s, "n_min")) {
    const auto pn = calibration::phase_noise_requirement(p, n_th, cfg.get(s, "n_min"));
    j["phase_noise"] = {{"S_phiphi_per_Hz", pn.S_phiphi}, {"dbc_per_hz", pn.dbc_per_hz}};
    std::printf("phase noise limit = %.4g dBc/Hz\n", pn.dbc_per_hz);
  }
  if (cfg.has(s, "C")) {
    const double C = cfg.get(s, "C");
    j["cooling_n_m"] = dynamics::cooling_occupation(n_th, cfg.get(s, "n_c", 0.0), C);
    j["squeezing_limit_db"] = squeezing::squeezing_limit(n_th, C);
  }
  j["sideband_resolution"] = p.sideband_resolution();
  j["thermal_decoherence_Hz"] = thermal_decoherence_rate(p.Gamma_m, n_th);
  Run out = start("limits", c, &cfg);
  out.json(out.primary(), j);
  out.finish();
  return 0;
}

int cmd_reproduce(const Common& c, int only) {
  if (!c.config.empty())
    throw Error(ErrorCode::ConfigError, "reproduce runs on the built-in reference parameters only");
  Json rows = Json::array();
  int failed = 0;
  for (const auto& cr : acceptance::criteria()) {
    if (only && cr.id != only) continue;
    const auto r = acceptance::run_criterion(cr);
    std::printf("%s\n", r.line().c_str());
    Json checks = Json::array();
    for (const auto& k : r.checks)
      checks.push_back({{"label", k.label}, {"value", k.value}, {"target", k.target}, {"pass", k.pass}});
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass()}, {"error", r.error}, {"checks", checks}});
    if (!r.pass()) ++failed;
  }
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "no criterion with id " + std::to_string(only));
  Run out = start("reproduce", c, nullptr);
  out.json(out.primary(), {{"criteria", rows}, {"failed", failed}});
  std::printf("%d of %zu criteria failed\n", failed, rows.size());
  out.finish();
  return failed ? 1 : 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Optomechanics modelling and analysis toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  std::map<const CLI::App*, std::string> default_out_;
  auto add_common = [&](CLI::App* sub, const std::string& default_out, bool config = true) {
    if (config) {
      sub->add_option("--config", c.config, "configuration file");
      sub->add_flag("--paper-params", c.paper, "use the built-in reference parameters");
    }
    sub->add_option("--out", c.out, "primary output file (default " + default_out + ")");
    default_out_[sub] = default_out;
    return sub;
  };

  auto* device = add_common(app.add_subcommand("device", "drum mode figures and scaling sweeps"), "device.csv");
  auto* psd = add_common(app.add_subcommand("psd", "output noise spectrum"), "psd.csv");
  auto* cool = add_common(app.add_subcommand("cool", "steady-state occupation under sideband cooling"), "cool.json");
  auto* asym = add_common(app.add_subcommand("asymmetry", "occupations from sideband asymmetry"), "asymmetry.json");
  std::optional<double> eta_kappa;
  asym->add_option("--input", c.input, "peaks CSV")->required();
  asym->add_option("--eta-kappa", eta_kappa, "cavity collection efficiency");
  auto* amp = add_common(app.add_subcommand("amplify", "optomechanical amplifier and calibration"), "amplify.json");
  std::optional<long> samples;
  amp->add_option("--input", c.input, "calibration CSV (n_m, sigma2_uV2)");
  amp->add_option("--samples", samples, "draw this many quadrature samples of [state]")->check(CLI::PositiveNumber);
  amp->add_option("--seed", c.seed, "random seed");
  auto* therm = add_common(app.add_subcommand("thermalize", "simulated free evolution and heating fit"), "thermalize.json");
  therm->add_option("--seed", c.seed, "random seed");
  auto* sq = add_common(app.add_subcommand("squeeze", "dissipative squeezing target and evolution"), "squeeze.json");
  auto* deph = add_common(app.add_subcommand("dephase", "pure dephasing from squeezed-state decay"), "dephase.json");
  std::string kind = "rates";
  deph->add_option("--input", c.input, "rates or trajectory CSV");
  deph->add_option("--kind", kind, "input kind: rates or trajectory")->default_val("rates");
  auto* g0 = add_common(app.add_subcommand("g0fit", "coupling rate from a temperature sweep"), "g0fit.json");
  bool synthesize = false;
  g0->add_option("--input", c.input, "sweep CSV");
  g0->add_flag("--synthesize", synthesize, "generate the sweep from [sweep] instead of reading it");
  g0->add_option("--seed", c.seed, "random seed");
  auto* budget = add_common(app.add_subcommand("budget", "readout-chain and tone-cancellation budgets"), "budget.json");
  auto* limits = add_common(app.add_subcommand("limits", "phase-noise, cooling and squeezing limits"), "limits.json");
  auto* repro = add_common(app.add_subcommand("reproduce", "run the reproduction suite"), "reproduce.json");
  int only = 0;
  repro->add_option("--only", only, "run a single criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help() << "\n";
    return 2;
  }

  for (const auto& [sub, name] : default_out_)
    if (sub->parsed() && c.out.empty()) c.out = name;

  try {
    if (*device) return cmd_device(c);
    if (*psd) return cmd_psd(c);
    if (*cool) return cmd_cool(c);
    if (*asym) return cmd_asymmetry(c, eta_kappa);
    if (*amp) return cmd_amplify(c, samples);
    if (*therm) return cmd_thermalize(c);
    if (*sq) return cmd_squeeze(c);
    if (*deph) return cmd_dephase(c, kind);
    if (*g0) return cmd_g0fit(c, synthesize);
    if (*budget) return cmd_budget(c);
    if (*limits) return cmd_limits(c);
    if (*repro) return cmd_reproduce(c, only);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_variant_access&) {
    std::cerr << "error: dataset kind mismatch\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cerr << app.help() << "\n";
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace omech::cli
