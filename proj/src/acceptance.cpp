#include "omech/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "omech/calibration.hpp"
#include "omech/core.hpp"
#include "omech/device.hpp"
#include "omech/dynamics.hpp"
#include "omech/error.hpp"
#include "omech/fitting.hpp"
#include "omech/squeezing.hpp"
#include "omech/tomography.hpp"

namespace omech::acceptance {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Check near(const std::string& label, double value, double target, double tol) {
  return {label, value, fmt("%.6g", target) + " +/- " + fmt("%.3g", tol),
          std::abs(value - target) <= tol};
}

Check rel(const std::string& label, double value, double target, double tol) {
  return {label, value, fmt("%.6g", target) + " within " + fmt("%.3g", tol) + " rel",
          std::abs(value / target - 1) <= tol};
}

Check at_most(const std::string& label, double value, double bound) {
  return {label, value, "<= " + fmt("%.3g", bound), value <= bound};
}

Check at_least(const std::string& label, double value, double bound) {
  return {label, value, ">= " + fmt("%.3g", bound), value >= bound};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

bool CriterionResult::pass() const {
  if (!error.empty() || checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string CriterionResult::line() const {
  std::ostringstream out;
  out << (pass() ? "PASS" : "FAIL") << " " << id << " " << name << ":";
  if (!error.empty()) out << " error: " << error;
  for (const auto& c : checks)
    out << " [" << c.label << " = " << fmt("%.6g", c.value) << ", target " << c.target
        << (c.pass ? "" : ", MISS") << "]";
  return out.str();
}

CriterionResult ground_state_cooling() {
  CriterionResult r{1, "ground-state cooling", {}, {}};
  const double n = dynamics::cooling_occupation(255, 0.03, 6400);
  r.checks.push_back(near("n_m from cooling law", n, 0.070, 0.002));
  r.checks.push_back(near("n_m vs reported 0.068(9)", n, 0.068, 0.009));

  // Noiseless spectra through peak fits and the asymmetry solver.
  const SystemParams p = paper_system_params();
  BathOccupations b = make_baths(p, 0.0, 255);
  b.n_c = 0.03;
  DriveSet d;
  d.add(DriveRole::CoolingPump, 0.0, 6400 * p.Gamma_m);
  d.add(DriveRole::RedProbe, 40e3, 15.0);
  d.add(DriveRole::BlueProbe, 40e3, 15.0);
  const auto ss = dynamics::steady_state(p, b, d);
  const double Gt = ss.gamma_tot;

  auto area = [&](dynamics::Component c, double center, double half) {
    const auto grid = uniform_grid(center, half, 4001);
    const auto psd = dynamics::output_psd(p, b, d, grid, true);
    return fitting::fit_peak(psd.spectrum(c), fitting::PeakModel::Lorentzian).area;
  };
  const double Pp = area(dynamics::Component::Pump, 0.0, 40 * Gt);
  const double Pr = area(dynamics::Component::Red, -40e3, 40 * Gt);
  const double Pb = area(dynamics::Component::Blue, 40e3, 40 * Gt);
  const double Pc = area(dynamics::Component::Cavity, 0.0, 10 * p.kappa);
  const auto peaks = calibration::scale_fluxes(Pp, Pr, Pb, Pc, d.gamma(DriveRole::CoolingPump),
                                               d.gamma(DriveRole::RedProbe),
                                               d.gamma(DriveRole::BlueProbe), p.kappa);
  const auto sol = calibration::asymmetry_solve(peaks);
  r.checks.push_back(rel("round-trip n_m", sol.n_m, ss.occupations.n_m, 1e-6));
  r.checks.push_back(rel("round-trip n_c", sol.n_c, b.n_c, 1e-6));
  r.checks.push_back(rel("round-trip G eta", sol.G_eta, p.eta_kappa(), 1e-6));
  return r;
}

CriterionResult thermal_decoherence() {
  CriterionResult r{2, "thermal decoherence", {}, {}};
  tomography::FreeEvolutionConfig cfg;
  cfg.Gamma_th = 20.5;
  cfg.Gamma_m = 0.08;
  cfg.t_short = 2e-3;
  const tomography::Readout ro{1.13, 0.80};
  const auto res = tomography::free_evolution_experiment(GaussianMechState::vacuum(), cfg,
                                                         linspace(0, 2e-3, 401), ro, 12000, 7001);
  r.checks.push_back(near("short-time slope (Hz)", res.fit.slope, 20.5, 0.6));
  r.checks.push_back(rel("T1 (ms) vs 7.8", res.fit.T1 * 1e3, 7.8, 0.05));
  r.checks.push_back(rel("T1 (ms) vs reported 7.7", res.fit.T1 * 1e3, 7.7, 0.05));
  return r;
}

CriterionResult amplifier_calibration() {
  CriterionResult r{3, "amplifier calibration", {}, {}};
  const std::vector<double> n_m = {0.1, 0.3, 1.0, 3.0, 10.0};
  const auto pts = tomography::simulate_calibration(n_m, 1.13, 0.80, 12000, 3003);
  const auto cal = tomography::calibrate_amplifier(pts);
  r.checks.push_back(near("G_opt (uV^2/quanta)", cal.g_opt, 1.13, 0.04));
  r.checks.push_back(near("n_add_opt (quanta)", cal.n_add_opt, 0.80, 0.09));
  r.checks.push_back(at_most("G_opt fit error", cal.g_opt_err, 0.04));
  r.checks.push_back(at_most("n_add_opt fit error", cal.n_add_opt_err, 0.09));
  const auto spec = tomography::AmplifierSpec::from_rates(85 + 0.045, 0.045, 22e-3, 1e-5, 0.8);
  const auto mf = tomography::matched_filter(spec);
  r.checks.push_back(near("matched-filter gain (dB)", mf.gain_db, 51.0, 0.05));
  r.checks.push_back(near("gain vs reported ~50 dB", mf.gain_db, 50.0, 1.5));
  return r;
}

CriterionResult squeezing_bookkeeping() {
  CriterionResult r{4, "squeezing bookkeeping", {}, {}};
  const double g = 1.13, na = 0.80;
  const double v_sq = tomography::subtract_noise(g * (0.27 + na + 0.5), g, na);
  const double v_asq = tomography::subtract_noise(g * (3.27 + na + 0.5), g, na);
  r.checks.push_back(near("squeezed variance (dB)", tomography::variance_db(v_sq), -2.7, 0.1));
  r.checks.push_back(near("anti-squeezed variance (dB)", tomography::variance_db(v_asq), 8.1, 0.1));
  const auto st = squeezing::squeezed_thermal_from_variances(v_sq, v_asq);
  r.checks.push_back(near("n_th", st.n_th, 0.4, 0.2));
  r.checks.push_back(near("r", st.r, 0.6, 0.1));
  return r;
}

CriterionResult dephasing_extraction() {
  CriterionResult r{5, "dephasing extraction", {}, {}};
  const SqueezedThermal init{0.4, 0.6, 0.0};
  squeezing::DephasingModel m;
  m.Gamma_th = 17.1;
  m.Gamma_phi = 0.09;
  m.initial = GaussianMechState::squeezed_thermal(init.n_th, init.r, init.theta);
  const double delta = squeezing::initial_rates(m).delta;
  r.checks.push_back(near("rate difference (Hz)", delta, 0.98, 0.02));
  r.checks.push_back(near("rate difference vs measured 1.1(6)", delta, 1.1, 0.6));

  // Noiseless rates fitted from the evolved moments over the default window.
  const auto traj = squeezing::moments_evolve(m, linspace(0, 2e-3, 21));
  const auto clean = squeezing::extract_dephasing(traj, init);
  r.checks.push_back(near("noiseless inversion (Hz)", clean.Gamma_phi, 0.09, 1e-3));

  const auto meas = squeezing::extract_dephasing(1.1, 0.6, init, 17.1);
  r.checks.push_back(near("inversion of 1.1(6) Hz", meas.Gamma_phi, 0.09, 0.05));
  r.checks.push_back({"interval contains 0.09", 0.5 * (meas.hi - meas.lo),
                      "[" + fmt("%.4g", meas.lo) + ", " + fmt("%.4g", meas.hi) + "] holds 0.09",
                      meas.lo <= 0.09 && meas.hi >= 0.09});
  r.checks.push_back(near("interval half-width (Hz)", 0.5 * (meas.hi - meas.lo), 0.05, 0.01));
  return r;
}

CriterionResult oracle_equivalence() {
  CriterionResult r{6, "oracle equivalence", {}, {}};
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(0, 1);
  const auto times = linspace(0, 5e-3, 11);
  double worst = 0, trace = 0, herm = 0, min_eig = 0;
  for (int c = 0; c < 20; ++c) {
    squeezing::DephasingModel m;
    m.Gamma_th = 50 * u(rng);
    m.Gamma_phi = u(rng);
    m.initial = GaussianMechState::squeezed_thermal(2 * u(rng), u(rng), 3.14159 * (u(rng) - 0.5));
    const auto lr = squeezing::lindblad_evolve(m, times);
    const auto mr = squeezing::moments_evolve(m, times);
    for (size_t i = 0; i < times.size(); ++i) {
      worst = std::max(worst, std::abs(lr.trajectory.n[i] - mr.n[i]) / std::max(mr.n[i], 1e-3));
      worst = std::max(worst, std::abs(lr.trajectory.x_sq[i] / mr.x_sq[i] - 1));
      worst = std::max(worst, std::abs(lr.trajectory.x_asq[i] / mr.x_asq[i] - 1));
    }
    trace = std::max(trace, lr.max_trace_error);
    herm = std::max(herm, lr.max_hermiticity_error);
    min_eig = std::min(min_eig, lr.min_eigenvalue);
  }
  r.checks.push_back(at_most("worst relative moment error", worst, 1e-3));
  r.checks.push_back(at_most("trace error", trace, 1e-10));
  r.checks.push_back(at_most("Hermiticity error", herm, 1e-10));
  r.checks.push_back(at_least("min eigenvalue", min_eig, -1e-8));
  return r;
}

CriterionResult noise_budgets() {
  CriterionResult r{7, "noise budgets", {}, {}};
  calibration::ChainBudget in;
  in.snri_db = 11.3;
  in.n_add_H = 8.7;
  in.eta_T_db = 2.5;
  in.eta_db = 1.55;
  const auto b = calibration::chain_noise_budget(in);
  r.checks.push_back(near("n_add_T", b.n_add_T, 0.28, 0.01));
  r.checks.push_back(rel("n_add_T vs reported 0.3", b.n_add_T, 0.3, 0.1));
  r.checks.push_back(near("1 + n_add", b.total_background, 1.83, 0.01));
  r.checks.push_back(rel("1 + n_add vs reported 1.9", b.total_background, 1.9, 0.1));
  const double one = calibration::tone_cancellation_floor(3.14159265358979 / 360, 0.125, 1);
  const double two = calibration::tone_cancellation_floor(3.14159265358979 / 360, 0.125, 2);
  r.checks.push_back(near("cancellation, one branch (dB)", one, -35.5, 0.05));
  r.checks.push_back(at_most("one branch vs reported -35 dB", one, -35.0));
  r.checks.push_back(near("cancellation, two branches (dB)", two, -71.0, 0.1));
  r.checks.push_back(at_most("two branches vs reported -70 dB", two, -70.0));
  const auto pn = calibration::phase_noise_requirement(paper_system_params(), 255, 0.1);
  r.checks.push_back(near("phase-noise limit (dBc/Hz)", pn.dbc_per_hz, -137, 4));
  return r;
}

CriterionResult device_figures() {
  CriterionResult r{8, "device figures", {}, {}};
  const auto g = device::paper_geometry();
  const device::ModeContext ctx;
  const auto m = device::compute_mode(g, ctx);
  r.checks.push_back(rel("Omega_m (MHz) vs 1.84", m.Omega_m / 1e6, 1.84, 0.03));
  r.checks.push_back(rel("Omega_m (MHz) vs reported 1.8", m.Omega_m / 1e6, 1.8, 0.03));
  r.checks.push_back(rel("m_eff (ng)", m.m_eff * 1e12, 2.3, 0.03));
  r.checks.push_back(rel("x_zpf (fm)", m.x_zpf * 1e15, 1.4, 0.05));
  r.checks.push_back(rel("xi_cap", m.xi_cap, 0.93, 0.01));
  r.checks.push_back(rel("g0 theory (Hz)", m.g0, 14, 0.15));
  r.checks.push_back(rel("D_Q", m.D_Q, 100, 0.2));

  const std::vector<double> factors = {0.5, 0.7, 1.0, 1.4, 2.0};
  double worst = 0;
  for (auto axis : {device::SweepAxis::R, device::SweepAxis::sigma_m, device::SweepAxis::t,
                    device::SweepAxis::d}) {
    const auto rows = device::scaling_sweep(g, axis, factors, ctx);
    Eigen::ArrayXd x(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) x[i] = std::log(rows[i].factor);
    for (const char* q : {"Omega_m", "Gamma_m", "Q_m", "inv_Gamma_th", "g0", "C0"}) {
      Eigen::ArrayXd y(rows.size());
      for (size_t i = 0; i < rows.size(); ++i) y[i] = std::log(device::mode_quantity(rows[i].mode, q));
      const double slope = fitting::linear_fit(x, y).slope;
      worst = std::max(worst, std::abs(slope - device::table_exponent(q, axis)));
    }
  }
  r.checks.push_back(at_most("worst scaling-exponent error", worst, 1e-6));
  return r;
}

CriterionResult g0_sweep() {
  CriterionResult r{9, "g0 sweep", {}, {}};
  const SystemParams p = paper_system_params();
  calibration::SweepSynthesis s;
  s.T = linspace(0.02, 0.16, 8);
  s.noise = 0.1;
  s.seed = 9009;
  const auto fit = calibration::g0_from_sweep(calibration::synthesize_sweep(p, s), p, s.eta_att);
  r.checks.push_back(near("g0 (Hz)", fit.g0, 13.4, 0.5));
  r.checks.push_back(at_most("deviation in fit errors", std::abs(fit.g0 - 13.4) / fit.g0_err, 3.0));

  // Ensemble over seeds: the reported error should match the scatter and be
  // of the quoted size at this noise level.
  const int runs = 200;
  std::vector<double> g, err;
  int covered = 0;
  for (int k = 0; k < runs; ++k) {
    calibration::SweepSynthesis sk = s;
    sk.seed = 100 + k;
    const auto f = calibration::g0_from_sweep(calibration::synthesize_sweep(p, sk), p, sk.eta_att);
    g.push_back(f.g0);
    err.push_back(f.g0_err);
    if (std::abs(f.g0 - 13.4) <= f.g0_err) ++covered;
  }
  double mean = 0;
  for (double x : g) mean += x / runs;
  std::sort(err.begin(), err.end());
  const double median_err = 0.5 * (err[runs / 2 - 1] + err[runs / 2]);
  r.checks.push_back(near("ensemble mean g0 (Hz)", mean, 13.4, 0.25));
  r.checks.push_back(near("median fit error (Hz)", median_err, 0.5, 0.15));
  r.checks.push_back(near("one-sigma coverage", double(covered) / runs, 0.68, 0.12));

  // Common rescaling of chain gain and line attenuation.
  calibration::SweepSynthesis s2 = s;
  s2.gain *= 37.5;
  s2.eta_att *= 0.013;
  const auto fit2 = calibration::g0_from_sweep(calibration::synthesize_sweep(p, s2), p, s2.eta_att);
  r.checks.push_back(at_most("relative change under rescaling", std::abs(fit2.g0 / fit.g0 - 1), 1e-12));
  return r;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "ground-state cooling", ground_state_cooling},
      {2, "thermal decoherence", thermal_decoherence},
      {3, "amplifier calibration", amplifier_calibration},
      {4, "squeezing bookkeeping", squeezing_bookkeeping},
      {5, "dephasing extraction", dephasing_extraction},
      {6, "oracle equivalence", oracle_equivalence},
      {7, "noise budgets", noise_budgets},
      {8, "device figures", device_figures},
      {9, "g0 sweep", g0_sweep},
  };
  return list;
}

CriterionResult run_criterion(const Criterion& c) {
  try {
    return c.run();
  } catch (const std::exception& e) {
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.error = e.what();
    return r;
  }
}

}  // namespace omech::acceptance
