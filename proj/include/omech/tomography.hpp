#pragma once

// Pulsed readout by optomechanical amplification: matched filtering, added
// noise, Monte-Carlo quadrature batches and Gaussian state estimation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "omech/core.hpp"
#include "omech/gaussian_state.hpp"

namespace omech::tomography {

struct AmplifierSpec {
  double gamma_opt_b = 0;  // blue-pump anti-damping, Hz
  double gamma_amp = 0;    // gamma_opt_b - Gamma_m, Hz
  double tau = 0;          // filter length, s
  double dt = 0;           // sample step, s
  double eta_kappa = 1;
  double chain_gain = 1;   // G, detector units per output quantum
  double n_add_H = 0;      // added noise of the following chain, quanta

  static AmplifierSpec from_rates(double gamma_opt_b, double Gamma_m, double tau, double dt,
                                  double eta_kappa, double chain_gain = 1, double n_add_H = 0);

  // exp(2 pi gamma_amp tau).
  double gain() const;
  bool large_gain() const { return gain() >= 1e3; }
};

struct MatchedFilter {
  Eigen::ArrayXd t;        // bin start times
  Eigen::ArrayXd weights;  // bin-averaged m(t), so sum(w^2) dt = 1
  double dt = 0;
  double gain = 0;
  double gain_db = 0;
};

MatchedFilter matched_filter(const AmplifierSpec& spec);

// Exponential weights exp(gamma t / 2) normalized to unit energy, gamma in Hz
// (cyclic). gamma = 0 gives the flat filter.
Eigen::ArrayXd exponential_filter(double gamma, double tau, double dt);

// Signal-to-noise of filter m applied to traces s(t) = A exp(2 pi gamma_amp t / 2) + white
// noise, averaged over Monte-Carlo amplitudes A.
double filter_snr(const Eigen::ArrayXd& weights, const Eigen::MatrixXd& traces_signal,
                  double noise_density, double dt);

// Signal part of simulated amplified traces: row k is A_k exp(pi gamma_amp t).
Eigen::MatrixXd simulate_signal_traces(const AmplifierSpec& spec, int count, std::uint64_t seed);

struct AddedNoiseTerm {
  std::string name;
  double value = 0;
};

struct AddedNoiseBudget {
  double cavity_internal = 0;       // (1 - eta_kappa) n_c_th
  double thermal_decoherence = 0;   // Gamma_m n_m_th / Gamma_amp
  double chain = 0;                 // n_add_H / (eta_kappa e^{Gamma_amp tau})
  double total = 0;
  std::vector<AddedNoiseTerm> ranked;  // largest first
  std::vector<std::string> warnings;
  // Total noise of a simultaneous quadrature measurement: 1/2 + 1/2 + total.
  double measurement_noise() const { return 1.0 + total; }
};

AddedNoiseBudget predict_added_noise(const AmplifierSpec& spec, const SystemParams& p,
                                     const BathOccupations& baths);

struct Readout {
  double g_opt = 1;      // detector units (uV^2) per quantum
  double n_add_opt = 0;  // quanta
};

// G^opt = G eta_kappa e^{Gamma_amp tau}, n_add^opt from the predicted budget.
Readout readout_from_spec(const AmplifierSpec& spec, const SystemParams& p,
                          const BathOccupations& baths);

struct QuadratureBatch {
  Eigen::MatrixX2d samples;  // columns I, Q in uV
  double g_opt = 1;
  double n_add_opt = 0;
  std::uint64_t seed = 0;
  Eigen::Index count() const { return samples.rows(); }
};

// Zero-mean Gaussian (I, Q) with covariance g_opt (Sigma_X + (n_add + 1/2) I).
QuadratureBatch sample_quadratures(const GaussianMechState& state, double g_opt, double n_add_opt,
                                   Eigen::Index N, std::uint64_t seed);

struct Interval {
  double lo = 0, hi = 0;
};

struct StateEstimate {
  GaussianMechState state;
  double x1_var = 0, x2_var = 0;    // noise-subtracted, quanta
  double var_sq = 0, var_asq = 0;   // principal axes
  double axis_angle = 0;            // angle of the squeezed axis, rad; NaN if isotropic
  double n_m = 0;
  double n_m_err = 0;
  Interval x1_ci, x2_ci, var_sq_ci, var_asq_ci;   // 68% chi-square intervals
  double var_sq_db = 0, var_asq_db = 0;           // relative to 1/2
  Interval var_sq_db_ci, var_asq_db_ci;
  std::vector<double> theta_grid, theta_var;      // optional scan
  bool negative_variance = false;
  std::vector<std::string> warnings;
};

StateEstimate estimate_state(const QuadratureBatch& batch,
                             const std::optional<std::vector<double>>& theta_grid = std::nullopt);

// Noise subtraction from exact detector variances.
double subtract_noise(double detector_var, double g_opt, double n_add_opt);

// 10 log10(v / (1/2)).
double variance_db(double v);

struct CalibrationPoint {
  double n_m = 0;
  double sigma2 = 0;                // detector variance, uV^2
  std::optional<double> sigma2_err;  // standard error; defaults to sigma2 sqrt(2/N)
  std::optional<double> N;
};

struct CalibrationResult {
  double g_opt = 0, g_opt_err = 0;
  double n_add_opt = 0, n_add_opt_err = 0;
  double chi2 = 0;
  int dof = 0;
  std::vector<std::string> warnings;
};

// Weighted fit sigma2 = g_opt (n_m + 1 + n_add).
CalibrationResult calibrate_amplifier(const std::vector<CalibrationPoint>& points);

// Draws one batch per point and reduces it to a calibration point.
std::vector<CalibrationPoint> simulate_calibration(const std::vector<double>& n_m, double g_opt,
                                                   double n_add_opt, Eigen::Index N,
                                                   std::uint64_t seed);

struct FreeEvolutionConfig {
  double Gamma_th = 0;   // Hz
  double Gamma_m = 0;    // Hz
  double Gamma_phi = 0;  // Hz, optional pure dephasing
  double t_short = 2e-3; // window for the initial-slope fit, s
};

struct HeatingFit {
  double n_eq = 0, n_eq_err = 0;
  double n0 = 0, n0_err = 0;
  double slope = 0, slope_err = 0;  // d<n>/dt / 2 pi, Hz
  double T1 = 0;                    // time to gain one quantum, from the initial rate, s
};

struct FreeEvolutionResult {
  std::vector<double> times;
  std::vector<QuadratureBatch> batches;
  std::vector<StateEstimate> estimates;
  std::vector<GaussianMechState> truth;
  HeatingFit fit;
};

FreeEvolutionResult free_evolution_experiment(const GaussianMechState& prep,
                                              const FreeEvolutionConfig& cfg,
                                              const std::vector<double>& times,
                                              const Readout& readout, Eigen::Index N,
                                              std::uint64_t seed);

}  // namespace omech::tomography
