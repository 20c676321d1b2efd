#include "omech/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "omech/fitting.hpp"
#include "omech/numerics.hpp"
#include "omech/squeezing.hpp"

namespace omech::tomography {

AmplifierSpec AmplifierSpec::from_rates(double gamma_opt_b, double Gamma_m, double tau, double dt,
                                        double eta_kappa, double chain_gain, double n_add_H) {
  AmplifierSpec s;
  s.gamma_opt_b = gamma_opt_b;
  s.gamma_amp = gamma_opt_b - Gamma_m;
  s.tau = tau;
  s.dt = dt;
  s.eta_kappa = eta_kappa;
  s.chain_gain = chain_gain;
  s.n_add_H = n_add_H;
  return s;
}

double AmplifierSpec::gain() const { return std::exp(angular(gamma_amp) * tau); }

namespace {

// Bin-averaged energy weights of sqrt(G / (e^{G tau} - 1)) e^{G t / 2}, G angular.
Eigen::ArrayXd filter_weights(double G, double tau, double dt, Eigen::Index bins) {
  Eigen::ArrayXd w(bins);
  if (G == 0) {
    w.setConstant(1.0 / std::sqrt(tau));
    return w;
  }
  const double denom = std::expm1(G * tau);
  const double bin = std::expm1(G * dt);
  for (Eigen::Index k = 0; k < bins; ++k) {
    // integral over the bin of m^2, divided by dt
    const double e = std::exp(G * k * dt) * bin / denom;
    w[k] = std::sqrt(e / dt);
  }
  return w;
}

Eigen::Index bin_count(double tau, double dt) {
  if (!(tau > 0) || !(dt > 0)) throw Error(ErrorCode::InvalidTimeStep, "tau and dt must be positive");
  const double ratio = tau / dt;
  const double k = std::round(ratio);
  if (k < 1 || std::abs(ratio - k) > 1e-6 * std::max(1.0, k))
    throw Error(ErrorCode::InvalidTimeStep, "dt does not divide tau");
  return static_cast<Eigen::Index>(k);
}

}  // namespace

MatchedFilter matched_filter(const AmplifierSpec& spec) {
  if (!(spec.gamma_amp > 0))
    throw Error(ErrorCode::NonPositiveAmplification, "gamma_amp must be positive");
  const Eigen::Index bins = bin_count(spec.tau, spec.dt);
  const double dt = spec.tau / bins;
  MatchedFilter m;
  m.dt = dt;
  m.t = Eigen::ArrayXd::LinSpaced(bins, 0, dt * (bins - 1));
  m.weights = filter_weights(angular(spec.gamma_amp), spec.tau, dt, bins);
  m.gain = spec.gain();
  m.gain_db = 10 * std::log10(m.gain);
  return m;
}

Eigen::ArrayXd exponential_filter(double gamma, double tau, double dt) {
  const Eigen::Index bins = bin_count(tau, dt);
  return filter_weights(angular(gamma), tau, tau / bins, bins);
}

Eigen::MatrixXd simulate_signal_traces(const AmplifierSpec& spec, int count, std::uint64_t seed) {
  const Eigen::Index bins = bin_count(spec.tau, spec.dt);
  const double dt = spec.tau / bins;
  const double G = angular(spec.gamma_amp);
  const numerics::CounterNormal rng(seed);
  Eigen::MatrixXd s(count, bins);
  for (int k = 0; k < count; ++k) {
    const double A = rng(static_cast<std::uint64_t>(k));
    for (Eigen::Index i = 0; i < bins; ++i) s(k, i) = A * std::exp(0.5 * G * (i + 0.5) * dt);
  }
  return s;
}

double filter_snr(const Eigen::ArrayXd& weights, const Eigen::MatrixXd& traces, double noise_density,
                  double dt) {
  const Eigen::VectorXd proj = traces * weights.matrix() * dt;
  const double signal = proj.squaredNorm() / static_cast<double>(traces.rows());
  const double noise = noise_density * weights.square().sum() * dt;
  return signal / noise;
}

AddedNoiseBudget predict_added_noise(const AmplifierSpec& spec, const SystemParams& p,
                                     const BathOccupations& baths) {
  if (!(spec.gamma_amp > 0))
    throw Error(ErrorCode::NonPositiveAmplification, "gamma_amp must be positive");
  AddedNoiseBudget b;
  b.cavity_internal = (1 - spec.eta_kappa) * baths.n_c_th;
  b.thermal_decoherence = p.Gamma_m * baths.n_m_th / spec.gamma_amp;
  const double gain = spec.gain();
  b.chain = std::isinf(gain) ? 0.0 : spec.n_add_H / (spec.eta_kappa * gain);
  b.total = b.cavity_internal + b.thermal_decoherence + b.chain;
  b.ranked = {{"cavity_internal", b.cavity_internal},
              {"thermal_decoherence", b.thermal_decoherence},
              {"chain", b.chain}};
  std::stable_sort(b.ranked.begin(), b.ranked.end(),
                   [](const AddedNoiseTerm& x, const AddedNoiseTerm& y) { return x.value > y.value; });
  if (!spec.large_gain())
    b.warnings.push_back("amplification gain below 1e3; large-gain approximations degrade");
  return b;
}

Readout readout_from_spec(const AmplifierSpec& spec, const SystemParams& p,
                          const BathOccupations& baths) {
  Readout r;
  r.g_opt = spec.chain_gain * spec.eta_kappa * spec.gain();
  r.n_add_opt = predict_added_noise(spec, p, baths).total;
  return r;
}

QuadratureBatch sample_quadratures(const GaussianMechState& state, double g_opt, double n_add_opt,
                                   Eigen::Index N, std::uint64_t seed) {
  if (N < 1) throw Error(ErrorCode::ConfigError, "need at least one sample");
  if (!(g_opt > 0)) throw Error(ErrorCode::ConfigError, "g_opt must be positive");
  if (n_add_opt < 0) throw Error(ErrorCode::ConfigError, "n_add_opt must be non-negative");
  const Eigen::Matrix2d C =
      g_opt * (state.covariance() + (n_add_opt + 0.5) * Eigen::Matrix2d::Identity());
  Eigen::LLT<Eigen::Matrix2d> llt(C);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::UnphysicalVariances, "detector covariance not positive definite");
  const Eigen::Matrix2d L = llt.matrixL();
  const numerics::CounterNormal rng(seed);
  QuadratureBatch b;
  b.g_opt = g_opt;
  b.n_add_opt = n_add_opt;
  b.seed = seed;
  b.samples.resize(N, 2);
  for (Eigen::Index k = 0; k < N; ++k) {
    const auto [z1, z2] = rng.pair(static_cast<std::uint64_t>(k));
    b.samples(k, 0) = L(0, 0) * z1;
    b.samples(k, 1) = L(1, 0) * z1 + L(1, 1) * z2;
  }
  return b;
}

double subtract_noise(double detector_var, double g_opt, double n_add_opt) {
  return detector_var / g_opt - n_add_opt - 0.5;
}

double variance_db(double v) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  return 10 * std::log10(v / 0.5);
}

namespace {

// 68% interval of a true variance given a mean-of-squares estimate with N dof.
Interval chi2_interval(double v_hat, double N) {
  const double lo_q = numerics::chi2_quantile(0.8413447460685429, N);
  const double hi_q = numerics::chi2_quantile(0.15865525393145707, N);
  return {N * v_hat / lo_q, N * v_hat / hi_q};
}

Interval subtract_interval(const Interval& det, double g, double n_add) {
  return {subtract_noise(det.lo, g, n_add), subtract_noise(det.hi, g, n_add)};
}

Interval db_interval(const Interval& v) { return {variance_db(v.lo), variance_db(v.hi)}; }

}  // namespace

StateEstimate estimate_state(const QuadratureBatch& batch,
                             const std::optional<std::vector<double>>& theta_grid) {
  const Eigen::Index N = batch.count();
  if (N < 1) throw Error(ErrorCode::ConfigError, "empty batch");
  const double g = batch.g_opt, na = batch.n_add_opt;
  const auto I = batch.samples.col(0).array();
  const auto Q = batch.samples.col(1).array();
  const double VI = I.square().mean();
  const double VQ = Q.square().mean();
  const double CIQ = (I * Q).mean();

  StateEstimate e;
  e.x1_var = subtract_noise(VI, g, na);
  e.x2_var = subtract_noise(VQ, g, na);
  const double cross = CIQ / g;
  e.state.n = 0.5 * (e.x1_var + e.x2_var) - 0.5;
  e.state.b2 = {0.5 * (e.x1_var - e.x2_var), cross};
  e.n_m = e.state.n;

  Eigen::Matrix2d S;
  S << e.x1_var, cross, cross, e.x2_var;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
  e.var_sq = es.eigenvalues()[0];
  e.var_asq = es.eigenvalues()[1];
  if (e.var_asq - e.var_sq <= 1e-12 * std::max(1.0, std::abs(e.var_asq))) {
    e.axis_angle = std::numeric_limits<double>::quiet_NaN();
  } else {
    const Eigen::Vector2d v = es.eigenvectors().col(0);
    double a = std::atan2(v[1], v[0]);
    if (a > std::numbers::pi / 2) a -= std::numbers::pi;
    if (a <= -std::numbers::pi / 2) a += std::numbers::pi;
    e.axis_angle = a;
  }

  const double dN = static_cast<double>(N);
  e.x1_ci = subtract_interval(chi2_interval(VI, dN), g, na);
  e.x2_ci = subtract_interval(chi2_interval(VQ, dN), g, na);
  e.var_sq_ci = subtract_interval(chi2_interval(g * (e.var_sq + na + 0.5), dN), g, na);
  e.var_asq_ci = subtract_interval(chi2_interval(g * (e.var_asq + na + 0.5), dN), g, na);
  e.var_sq_db = variance_db(e.var_sq);
  e.var_asq_db = variance_db(e.var_asq);
  e.var_sq_db_ci = db_interval(e.var_sq_ci);
  e.var_asq_db_ci = db_interval(e.var_asq_ci);
  e.n_m_err = std::sqrt(2.0 / dN) * std::sqrt(VI * VI + VQ * VQ) / (2 * g);

  if (theta_grid) {
    e.theta_grid = *theta_grid;
    for (double th : *theta_grid) {
      const double c = std::cos(th), s = std::sin(th);
      const double v = (c * I + s * Q).square().mean();
      e.theta_var.push_back(subtract_noise(v, g, na));
    }
  }
  if (e.x1_var < 0 || e.x2_var < 0 || e.var_sq < 0) {
    e.negative_variance = true;
    e.warnings.push_back("NegativeVarianceEstimate: noise-subtracted variance below zero");
  }
  return e;
}

CalibrationResult calibrate_amplifier(const std::vector<CalibrationPoint>& points) {
  if (points.size() < 2)
    throw Error(ErrorCode::DegenerateDesign, "calibration needs at least two points");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::ArrayXd x(n), y(n), s(n);
  bool weighted = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[i];
    x[i] = p.n_m;
    y[i] = p.sigma2;
    if (p.sigma2_err)
      s[i] = *p.sigma2_err;
    else if (p.N)
      s[i] = p.sigma2 * std::sqrt(2.0 / *p.N);
    else
      weighted = false;
  }
  CalibrationResult out;
  const fitting::LinearFit f =
      weighted ? fitting::linear_fit(x, y, s) : fitting::linear_fit(x, y);
  const double a = f.slope, b = f.intercept;
  out.g_opt = a;
  out.g_opt_err = f.slope_err();
  out.n_add_opt = b / a - 1;
  const double va = f.covariance(0, 0), vb = f.covariance(1, 1), cab = f.covariance(0, 1);
  const double var_n = vb / (a * a) + b * b / (a * a * a * a) * va - 2 * b / (a * a * a) * cab;
  out.n_add_opt_err = std::sqrt(std::max(var_n, 0.0));
  out.chi2 = f.chi2;
  out.dof = f.dof;
  if (n == 2) out.warnings.push_back("two points: exactly determined fit, no residual degrees of freedom");
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  if (n >= 3 && (lo <= 0 || hi / lo < 10))
    out.warnings.push_back("calibration points span less than a decade of n_m");
  return out;
}

std::vector<CalibrationPoint> simulate_calibration(const std::vector<double>& n_m, double g_opt,
                                                   double n_add_opt, Eigen::Index N,
                                                   std::uint64_t seed) {
  std::vector<CalibrationPoint> pts;
  for (size_t k = 0; k < n_m.size(); ++k) {
    const auto batch = sample_quadratures(GaussianMechState::thermal(n_m[k]), g_opt, n_add_opt, N,
                                          numerics::splitmix64(seed + 0x632be59bd9b4e019ULL * (k + 1)));
    // Both quadratures carry the same variance for a thermal state.
    const double v = 0.5 * (batch.samples.col(0).array().square().mean() +
                            batch.samples.col(1).array().square().mean());
    CalibrationPoint p;
    p.n_m = n_m[k];
    p.sigma2 = v;
    p.N = 2.0 * static_cast<double>(N);
    p.sigma2_err = v * std::sqrt(2.0 / *p.N);
    pts.push_back(p);
  }
  return pts;
}

FreeEvolutionResult free_evolution_experiment(const GaussianMechState& prep,
                                              const FreeEvolutionConfig& cfg,
                                              const std::vector<double>& times,
                                              const Readout& readout, Eigen::Index N,
                                              std::uint64_t seed) {
  if (!(cfg.Gamma_m > 0) || !(cfg.Gamma_th > 0))
    throw Error(ErrorCode::NonPositiveRate, "Gamma_m and Gamma_th must be positive");
  for (double t : times)
    if (t < 0) throw Error(ErrorCode::ConfigError, "times must be non-negative");

  squeezing::DephasingModel model;
  model.form = squeezing::DissipatorForm::FiniteTemperature;
  model.Gamma_m = cfg.Gamma_m;
  model.n_m_th = bath_occupation_from_rates(cfg.Gamma_th, cfg.Gamma_m);
  model.Gamma_th = cfg.Gamma_th;
  model.Gamma_phi = cfg.Gamma_phi;
  model.initial = prep;
  const squeezing::Trajectory traj = squeezing::moments_evolve(model, times);

  FreeEvolutionResult out;
  out.times = times;
  const size_t K = times.size();
  for (size_t k = 0; k < K; ++k) {
    GaussianMechState s{traj.n[k], traj.b2[k]};
    out.truth.push_back(s);
    const std::uint64_t sk = numerics::splitmix64(seed + 0x9e3779b97f4a7c15ULL * (k + 1));
    out.batches.push_back(sample_quadratures(s, readout.g_opt, readout.n_add_opt, N, sk));
    out.estimates.push_back(estimate_state(out.batches.back()));
  }

  // Exponential approach with Gamma_m fixed is linear in (n_eq, n0).
  const Eigen::Index n = static_cast<Eigen::Index>(K);
  if (n >= 2) {
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = std::exp(-angular(cfg.Gamma_m) * times[i]);
      const double sig = std::max(out.estimates[i].n_m_err, 1e-300);
      A(i, 0) = (1 - e) / sig;
      A(i, 1) = e / sig;
      y[i] = out.estimates[i].n_m / sig;
    }
    const Eigen::Matrix2d AtA = A.transpose() * A;
    const Eigen::Vector2d sol = AtA.ldlt().solve(A.transpose() * y);
    const Eigen::Matrix2d cov = AtA.inverse();
    out.fit.n_eq = sol[0];
    out.fit.n0 = sol[1];
    out.fit.n_eq_err = std::sqrt(std::max(cov(0, 0), 0.0));
    out.fit.n0_err = std::sqrt(std::max(cov(1, 1), 0.0));
  }

  std::vector<double> ts, ns, ss;
  for (size_t k = 0; k < K; ++k)
    if (times[k] <= cfg.t_short) {
      ts.push_back(times[k]);
      ns.push_back(out.estimates[k].n_m);
      ss.push_back(std::max(out.estimates[k].n_m_err, 1e-300));
    }
  if (ts.size() >= 2) {
    const auto f = fitting::linear_fit(Eigen::Map<Eigen::ArrayXd>(ts.data(), ts.size()),
                                       Eigen::Map<Eigen::ArrayXd>(ns.data(), ns.size()),
                                       Eigen::ArrayXd(Eigen::Map<Eigen::ArrayXd>(ss.data(), ss.size())));
    out.fit.slope = f.slope / kTwoPi;
    out.fit.slope_err = f.slope_err() / kTwoPi;
    // With Gamma_m fixed the initial rate fixes n_eq - n0 = slope / Gamma_m.
    const double x = cfg.Gamma_m / out.fit.slope;
    out.fit.T1 = x > 0 && x < 1 ? -std::log1p(-x) / angular(cfg.Gamma_m)
                                : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace omech::tomography
