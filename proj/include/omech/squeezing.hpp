#pragma once

// Two-tone dissipative squeezing targets and the thermalization of squeezed
// states under a master equation with thermal and pure-dephasing dissipators.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "omech/gaussian_state.hpp"

namespace omech::squeezing {

struct SqueezeDrive {
  double gamma_r = 0;  // red-pump optomechanical damping, Hz
  double gamma_b = 0;  // blue-pump anti-damping, Hz

  double ratio_db() const { return 10 * std::log10(gamma_b / gamma_r); }
  static SqueezeDrive from_ratio_db(double gamma_r, double ratio_db);
};

struct SqueezeTarget {
  double r = 0;
  double var_sq = 0.5, var_asq = 0.5;
  double var_sq_db = 0, var_asq_db = 0;
  double coupling_G = 0;  // Bogoliubov coupling, Hz
  double ratio_db = 0;
};

// tanh r = sqrt(gamma_b / gamma_r). kappa (Hz) only enters the coupling.
SqueezeTarget squeeze_target(const SqueezeDrive& drive, double kappa);

// 10 log10 sqrt((1 + 2 n_m_th) / C).
double squeezing_limit(double n_m_th, double C);

SqueezedThermal squeezed_thermal_from_variances(double v_sq, double v_asq);

enum class DissipatorForm {
  HighTemperature,    // Gamma_th on both D[b] and D[b^dag]
  FiniteTemperature,  // Gamma_m (n + 1) on D[b], Gamma_m n on D[b^dag]
};

struct DephasingModel {
  double Gamma_th = 0;   // Hz
  double Gamma_phi = 0;  // Hz
  GaussianMechState initial;
  int truncation_dim = 0;  // 0 selects the dimension adaptively
  DissipatorForm form = DissipatorForm::HighTemperature;
  double Gamma_m = 0;    // finite-temperature form only
  double n_m_th = 0;     // finite-temperature form only
};

void check_model(const DephasingModel& m);

struct Trajectory {
  std::vector<double> t;
  std::vector<double> n;
  std::vector<std::complex<double>> b2;
  std::vector<double> x1, x2;       // <X1^2>, <X2^2>
  std::vector<double> x_sq, x_asq;  // along the initial principal axes
  double axis_angle = 0;            // squeezed axis, rad
};

Trajectory moments_evolve(const DephasingModel& model, const std::vector<double>& times);

struct DecoherenceRates {
  double Gamma_sq = 0;   // d<X_sq^2>/dt / 2 pi, Hz
  double Gamma_asq = 0;
  double Gamma_th_est = 0;
  double delta = 0;
  double Gamma_sq_err = 0, Gamma_asq_err = 0, delta_err = 0;
};

// Analytic slopes at t = 0.
DecoherenceRates initial_rates(const DephasingModel& model);

// Straight-line slopes of x_sq and x_asq over t <= window.
DecoherenceRates rates_from_trajectory(const Trajectory& traj, double window);

struct LindbladOptions {
  double population_tol = 1e-8;  // top Fock level population
  double observable_tol = 1e-4;  // relative change after doubling the dimension
  int max_dim = 2048;
  bool check_cptp = true;
  double max_step_qh = 200;      // uniformization steps per solver step
  long max_terms = 50'000'000;   // cap on series terms across the whole run
};

struct LindbladResult {
  Trajectory trajectory;
  int dim = 0;
  int steps = 0;
  double max_trace_error = 0;
  double min_eigenvalue = 0;
  double max_hermiticity_error = 0;
  double top_population = 0;
  double initial_trace_loss = 0;
};

// Truncated-Fock density-matrix integration of the master equation.
LindbladResult lindblad_evolve(const DephasingModel& model, const std::vector<double>& times,
                               const LindbladOptions& opts = {});

struct DephasingOptions {
  double window = 2e-3;   // fit window for the rate difference, s; 0 means initial slope
  int window_points = 21;
  double tol = 1e-4;      // Hz
  int curve_points = 41;
  double curve_max = 0;   // upper end of the reported curve; 0 picks 2x the estimate
};

struct DephasingResult {
  double Gamma_phi = 0;
  double lo = 0, hi = 0;
  std::vector<std::pair<double, double>> curve;  // (Gamma_phi, delta)
};

struct StateUncertainty {
  double n_th_err = 0;
  double r_err = 0;
};

// Rate difference predicted for a given dephasing rate. Results are cached.
class DephasingCurve {
 public:
  DephasingCurve(const SqueezedThermal& initial, double Gamma_th, const DephasingOptions& opts);
  double operator()(double Gamma_phi);
  double invert(double delta);

 private:
  SqueezedThermal initial_;
  double Gamma_th_;
  DephasingOptions opts_;
  std::vector<std::pair<double, double>> cache_;
};

DephasingResult extract_dephasing(double delta, double delta_err, const SqueezedThermal& initial,
                                  double Gamma_th, const DephasingOptions& opts = {},
                                  const std::optional<StateUncertainty>& state_err = std::nullopt);

// Uses the rates fitted from an observed trajectory.
DephasingResult extract_dephasing(const Trajectory& observed, const SqueezedThermal& initial,
                                  const DephasingOptions& opts = {},
                                  const std::optional<StateUncertainty>& state_err = std::nullopt);

}  // namespace omech::squeezing
