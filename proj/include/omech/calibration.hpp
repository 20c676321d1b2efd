#pragma once

// Inverse pipelines of the continuous-wave measurements and the noise budgets
// of the readout chain. Peak powers are rate-normalized: N_x = P_x / (2 pi
// Gamma_x) for the sidebands and N_c = P_c / (2 pi kappa) for the cavity.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omech/core.hpp"

namespace omech::calibration {

struct ScaledPeaks {
  std::optional<double> N_p;  // cooling-pump sideband; preferred over N_r
  std::optional<double> N_r;
  double N_b = 0;
  double N_c = 0;
  double R_Gamma = 1;         // Gamma_b / Gamma_r, informational
  std::optional<double> N_floor;
  double blue_correction = 1; // multiplicative probe-imbalance correction on N_b
  // Optional one-sigma errors for propagation.
  double N_p_err = 0, N_r_err = 0, N_b_err = 0, N_c_err = 0;

  double R_N() const;  // N_b / N_r (or N_p)
};

// Normalizes integrated fluxes (quanta/s, or detector units) by their rates (Hz).
ScaledPeaks scale_fluxes(std::optional<double> P_p, std::optional<double> P_r, double P_b,
                         double P_c, std::optional<double> Gamma_p, std::optional<double> Gamma_r,
                         double Gamma_b, double kappa);

// Noiseless peaks for given occupations and scaling.
ScaledPeaks forward_peaks(double n_m, double n_c, double G_eta, double R_Gamma = 1,
                          std::optional<double> n_add = std::nullopt,
                          std::optional<double> eta_kappa = std::nullopt);

struct AsymmetryResult {
  double n_m = 0, n_c = 0, G_eta = 0;
  double n_m_err = 0, n_c_err = 0, G_eta_err = 0;
  std::optional<double> n_add;      // needs eta_kappa to separate G
  std::optional<double> n_add_eff;  // N_floor / (G eta) - 1
  bool negative_occupation = false;
  std::vector<std::string> warnings;
};

AsymmetryResult asymmetry_solve(const ScaledPeaks& peaks,
                                std::optional<double> eta_kappa = std::nullopt);

struct ProbeFree {
  double n_m = 0, n_c = 0;
};

// n_c = N_c / G_eta, n_m = N_p / G_eta + 2 n_c.
ProbeFree probe_free_occupations(double N_p, double N_c, double G_eta);

struct PlateauPoint {
  double C = 0;
  double value = 0;
  double err = 0;
};

struct PlateauMean {
  double mean = 0, err = 0;
  int count = 0;
};

// Inverse-variance mean of the points with C >= C_min.
PlateauMean plateau_average(const std::vector<PlateauPoint>& pts, double C_min = 2000);

// dB <-> linear power ratio.
double db_to_linear(double db);
double linear_to_db(double x);

struct ChainBudget {
  double snri_db = 0;   // noise-rise improvement of the paramp
  double n_add_H = 0;   // HEMT-referred added noise, quanta
  double eta_T_db = 0;  // paramp off-state loss, positive dB
  double eta_db = 0;    // device to paramp loss, positive dB
  double G_T_db = 0;    // paramp gain, dB (informational)
  // outputs
  double n_add_T = 0;
  double total_background = 0;  // 1 + n_add referred to the device
  std::vector<std::string> warnings;
};

ChainBudget chain_noise_budget(const ChainBudget& in);

struct SweepPoint {
  double T = 0;           // K
  double P_SB_meas = 0;   // detector units
  double P_cal_meas = 0;
  double P_MW_src = 0;    // W at the source
  double P_cal_src = 0;
};

struct G0SweepResult {
  double g0 = 0, g0_err = 0;  // Hz
  double slope = 0, intercept = 0;  // calibrated ratio versus T (1/K)
  std::vector<double> ratio, residuals, n_th, n_ba;
  std::vector<std::string> warnings;
};

// Calibrated ratio (P_SB_meas / P_MW_src)(P_cal_src / P_cal_meas).
double sweep_ratio(const SweepPoint& s);
// Prefactor K with ratio = 4 g0^2 n_m K.
double sweep_prefactor(const SystemParams& p);
// k_B T / (hbar Omega_m).
double high_temperature_occupation(double T, double Omega_m);

// eta_att, if known, converts source to device pump power for the
// back-action check; otherwise the source power is used, which overestimates.
G0SweepResult g0_from_sweep(const std::vector<SweepPoint>& sweep, const SystemParams& p,
                            std::optional<double> eta_att = std::nullopt);

struct SweepSynthesis {
  std::vector<double> T;
  double P_MW_src = 1e-12;  // W
  double P_cal_src = 1e-15;
  double gain = 1e7;        // G
  double eta_att = 1e-6;
  double noise = 0;         // relative Gaussian noise on P_SB_meas
  std::uint64_t seed = 0;
};

std::vector<SweepPoint> synthesize_sweep(const SystemParams& p, const SweepSynthesis& s);

// n_ba for an on-resonance pump of P_MW watts at the device.
double backaction_quanta(const SystemParams& p, double P_MW);

// Guaranteed cancellation in dB; -inf for perfect matching.
double tone_cancellation_floor(double delta_phi, double delta_att_db, int branches = 1);

struct PhaseNoiseRequirement {
  double S_phiphi = 0;  // 1/Hz
  double dbc_per_hz = 0;
};

// Largest source phase noise at the mechanical offset that still allows n_min.
PhaseNoiseRequirement phase_noise_requirement(const SystemParams& p, double n_m_th, double n_min);

}  // namespace omech::calibration
