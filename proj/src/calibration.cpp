#include "omech/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omech/error.hpp"
#include "omech/fitting.hpp"
#include "omech/numerics.hpp"

namespace omech::calibration {

namespace {

double sideband_peak(const ScaledPeaks& p) {
  if (p.N_p) return *p.N_p;
  if (p.N_r) return *p.N_r;
  throw Error(ErrorCode::ConfigError, "need N_p or N_r");
}

}  // namespace

double ScaledPeaks::R_N() const {
  const double a = sideband_peak(*this);
  return N_b / a;
}

ScaledPeaks scale_fluxes(std::optional<double> P_p, std::optional<double> P_r, double P_b,
                         double P_c, std::optional<double> Gamma_p, std::optional<double> Gamma_r,
                         double Gamma_b, double kappa) {
  auto rate = [](double g, const char* what) {
    if (!(g > 0)) throw Error(ErrorCode::NonPositiveRate, std::string(what) + " must be positive");
    return angular(g);
  };
  ScaledPeaks s;
  if (P_p) {
    if (!Gamma_p) throw Error(ErrorCode::ConfigError, "pump flux given without its rate");
    s.N_p = *P_p / rate(*Gamma_p, "Gamma_p");
  }
  if (P_r) {
    if (!Gamma_r) throw Error(ErrorCode::ConfigError, "red flux given without its rate");
    s.N_r = *P_r / rate(*Gamma_r, "Gamma_r");
  }
  s.N_b = P_b / rate(Gamma_b, "Gamma_b");
  s.N_c = P_c / rate(kappa, "kappa");
  if (Gamma_r) s.R_Gamma = Gamma_b / *Gamma_r;
  return s;
}

ScaledPeaks forward_peaks(double n_m, double n_c, double G_eta, double R_Gamma,
                          std::optional<double> n_add, std::optional<double> eta_kappa) {
  ScaledPeaks s;
  s.N_p = G_eta * (n_m - 2 * n_c);
  s.N_r = s.N_p;
  s.N_b = G_eta * (n_m + 1 + 2 * n_c);
  s.N_c = G_eta * n_c;
  s.R_Gamma = R_Gamma;
  if (n_add && eta_kappa) s.N_floor = G_eta / *eta_kappa * (1 + *n_add);
  return s;
}

AsymmetryResult asymmetry_solve(const ScaledPeaks& peaks, std::optional<double> eta_kappa) {
  const double A = sideband_peak(peaks);
  const double A_err = peaks.N_p ? peaks.N_p_err : peaks.N_r_err;
  const double B = peaks.N_b * peaks.blue_correction;
  const double B_err = peaks.N_b_err * peaks.blue_correction;
  const double C = peaks.N_c;
  const double C_err = peaks.N_c_err;

  // N_b - N_r - 4 N_c isolates G eta_kappa.
  const double D = B - A - 4 * C;
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (!(std::abs(D) > 1e-12 * scale))
    throw Error(ErrorCode::SingularAsymmetry, "asymmetry denominator vanishes");

  AsymmetryResult r;
  r.n_m = (A + 2 * C) / D;
  r.n_c = (B * r.n_m - A * (r.n_m + 1)) / (2 * (A + B));
  r.G_eta = 0.5 * (A + B) / (r.n_m + 0.5);

  // Linear propagation with the partial derivatives of the closed forms.
  const double D2 = D * D;
  auto prop = [&](double dA, double dB, double dC) {
    return std::sqrt(dA * dA * A_err * A_err + dB * dB * B_err * B_err + dC * dC * C_err * C_err);
  };
  r.n_m_err = prop((B - 2 * C) / D2, -(A + 2 * C) / D2, 2 * (A + B) / D2);
  r.n_c_err = prop(C / D2, -C / D2, (B - A) / D2);
  r.G_eta_err = prop(-1, 1, -4);

  if (peaks.N_floor) {
    r.n_add_eff = *peaks.N_floor / r.G_eta - 1;
    if (eta_kappa) {
      if (!(*eta_kappa > 0 && *eta_kappa <= 1))
        throw Error(ErrorCode::ConfigError, "eta_kappa must lie in (0, 1]");
      r.n_add = *peaks.N_floor * *eta_kappa / r.G_eta - 1;
    }
  }
  if (r.n_m < 0 || r.n_c < 0) {
    r.negative_occupation = true;
    r.warnings.push_back("NegativeOccupation: solved occupation below zero");
  }
  if (!(r.G_eta > 0)) r.warnings.push_back("non-positive scaling factor");
  return r;
}

ProbeFree probe_free_occupations(double N_p, double N_c, double G_eta) {
  if (!(G_eta > 0)) throw Error(ErrorCode::ConfigError, "G_eta must be positive");
  ProbeFree r;
  r.n_c = N_c / G_eta;
  r.n_m = N_p / G_eta + 2 * r.n_c;
  return r;
}

PlateauMean plateau_average(const std::vector<PlateauPoint>& pts, double C_min) {
  double sw = 0, swx = 0;
  int count = 0;
  for (const auto& p : pts) {
    if (p.C < C_min) continue;
    if (!(p.err > 0)) throw Error(ErrorCode::ConfigError, "plateau points need positive errors");
    const double w = 1 / (p.err * p.err);
    sw += w;
    swx += w * p.value;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::DegenerateDesign, "no points on the plateau");
  return {swx / sw, 1 / std::sqrt(sw), count};
}

double db_to_linear(double db) { return std::pow(10.0, db / 10); }
double linear_to_db(double x) { return 10 * std::log10(x); }

ChainBudget chain_noise_budget(const ChainBudget& in) {
  if (in.eta_T_db < 0 || in.eta_db < 0)
    throw Error(ErrorCode::ConfigError, "losses are given as positive dB magnitudes");
  if (in.n_add_H < 0) throw Error(ErrorCode::ConfigError, "n_add_H must be non-negative");
  ChainBudget b = in;
  const double snri = db_to_linear(in.snri_db);
  const double eta_T = db_to_linear(-in.eta_T_db);
  const double eta = db_to_linear(-in.eta_db);
  b.n_add_T = (1 + in.n_add_H) / (eta_T * snri) - 1;
  b.total_background = (1 + in.n_add_H) / (eta * eta_T * snri);
  if (b.n_add_T < -0.05)
    throw Error(ErrorCode::InconsistentBudget, "noise-rise improvement exceeds the quantum limit");
  if (b.n_add_T < 0) b.warnings.push_back("n_add_T slightly negative, within tolerance");
  return b;
}

double sweep_ratio(const SweepPoint& s) {
  return s.P_SB_meas / s.P_MW_src * s.P_cal_src / s.P_cal_meas;
}

double sweep_prefactor(const SystemParams& p) {
  const double eta = p.kappa_ex / p.kappa;
  const double half_diff = 0.5 * (p.kappa_ex - p.kappa_0);
  return eta * eta / (p.Omega_m * p.Omega_m + half_diff * half_diff) * p.omega_c /
         (p.omega_c + p.Omega_m);
}

double high_temperature_occupation(double T, double Omega_m) {
  return kBoltzmann * T / (kHbar * angular(Omega_m));
}

double backaction_quanta(const SystemParams& p, double P_MW) {
  const double g0 = angular(p.g0), k = angular(p.kappa), kex = angular(p.kappa_ex);
  const double Gm = angular(p.Gamma_m);
  const double flux = P_MW / (kHbar * angular(p.omega_c));
  const double x = 2 * p.Omega_m / p.kappa;
  return 4 * g0 * g0 / (k * Gm) * (4 * kex / (k * k)) * flux / (1 + x * x);
}

G0SweepResult g0_from_sweep(const std::vector<SweepPoint>& sweep, const SystemParams& p,
                            std::optional<double> eta_att) {
  if (sweep.size() < 3) throw Error(ErrorCode::DegenerateDesign, "need at least three temperatures");
  if (!(p.Omega_m > 0) || !(p.kappa > 0) || !(p.omega_c > 0))
    throw Error(ErrorCode::NonPositiveFrequency, "frequencies must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(sweep.size());
  Eigen::ArrayXd T(n), y(n);
  G0SweepResult r;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = sweep[i];
    if (!(s.T > 0) || !(s.P_SB_meas > 0) || !(s.P_cal_meas > 0) || !(s.P_MW_src > 0) ||
        !(s.P_cal_src > 0))
      throw Error(ErrorCode::ConfigError, "sweep entries must be positive");
    T[i] = s.T;
    y[i] = sweep_ratio(s);
    r.ratio.push_back(y[i]);
    r.n_th.push_back(high_temperature_occupation(s.T, p.Omega_m));
  }
  const auto f = fitting::linear_fit(T, y);
  r.slope = f.slope;
  r.intercept = f.intercept;
  // ratio = 4 g0^2 K k_B T / (hbar Omega_m)
  const double per_kelvin = 4 * sweep_prefactor(p) * high_temperature_occupation(1.0, p.Omega_m);
  if (!(f.slope > 0)) throw Error(ErrorCode::FitNonConvergence, "sideband power does not rise with T");
  r.g0 = std::sqrt(f.slope / per_kelvin);
  r.g0_err = r.g0 * f.slope_err() / (2 * f.slope);
  for (Eigen::Index i = 0; i < n; ++i) r.residuals.push_back(y[i] - (f.slope * T[i] + f.intercept));

  SystemParams q = p;
  q.g0 = r.g0;
  if (!eta_att) r.warnings.push_back("back-action check uses source power (no line loss given)");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double P = sweep[i].P_MW_src * eta_att.value_or(1.0);
    const double nba = backaction_quanta(q, P);
    r.n_ba.push_back(nba);
    if (nba > 0.1 * r.n_th[i])
      throw Error(ErrorCode::BackActionDominated, "pump back-action exceeds 10% of the bath occupation");
  }
  return r;
}

std::vector<SweepPoint> synthesize_sweep(const SystemParams& p, const SweepSynthesis& s) {
  const double lorentz = p.Omega_m * p.Omega_m + 0.25 * p.kappa * p.kappa;
  const double eta = p.kappa_ex / p.kappa;
  const double hd = 0.5 * (p.kappa_ex - p.kappa_0), hs = 0.5 * (p.kappa_ex + p.kappa_0);
  const double cal_frac = (p.Omega_m * p.Omega_m + hd * hd) / (p.Omega_m * p.Omega_m + hs * hs);
  const numerics::CounterNormal rng(s.seed);
  std::vector<SweepPoint> out;
  for (size_t i = 0; i < s.T.size(); ++i) {
    SweepPoint pt;
    pt.T = s.T[i];
    pt.P_MW_src = s.P_MW_src;
    pt.P_cal_src = s.P_cal_src;
    const double n = high_temperature_occupation(pt.T, p.Omega_m);
    const double P_MW = s.eta_att * s.P_MW_src;
    const double P_SB = 4 * p.g0 * p.g0 * n * eta * eta / lorentz * p.omega_c /
                        (p.omega_c + p.Omega_m) * P_MW;
    pt.P_SB_meas = s.gain * P_SB * (1 + s.noise * rng(i));
    pt.P_cal_meas = s.gain * s.eta_att * cal_frac * s.P_cal_src;
    out.push_back(pt);
  }
  return out;
}

double tone_cancellation_floor(double delta_phi, double delta_att_db, int branches) {
  if (branches < 1) throw Error(ErrorCode::ConfigError, "branches must be >= 1");
  const double a = std::log(10.0) / 20 * delta_att_db;
  const double x = delta_phi * delta_phi + a * a;
  if (x == 0) return -std::numeric_limits<double>::infinity();
  return branches * 10 * std::log10(x);
}

PhaseNoiseRequirement phase_noise_requirement(const SystemParams& p, double n_m_th, double n_min) {
  if (!(n_min > 0)) throw Error(ErrorCode::ConfigError, "n_min must be positive");
  if (!(n_m_th > 0) || !(p.Gamma_m > 0) || !(p.Omega_m > 0))
    throw Error(ErrorCode::NonPositiveRate, "n_m_th, Gamma_m and Omega_m must be positive");
  PhaseNoiseRequirement r;
  r.S_phiphi = p.g0 * p.g0 * n_min * n_min / (p.Omega_m * p.Omega_m * n_m_th * p.Gamma_m);
  r.dbc_per_hz = 10 * std::log10(r.S_phiphi / 2);
  return r;
}

}  // namespace omech::calibration
