#include "omech/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>

#include <Eigen/Dense>

#include "omech/core.hpp"
#include "omech/error.hpp"
#include "omech/fitting.hpp"

namespace omech::squeezing {

namespace {

double db_of_variance(double v) { return 10 * std::log10(v / 0.5); }

}  // namespace

SqueezeDrive SqueezeDrive::from_ratio_db(double gamma_r, double ratio_db) {
  return {gamma_r, gamma_r * std::pow(10.0, ratio_db / 10)};
}

SqueezeTarget squeeze_target(const SqueezeDrive& drive, double kappa) {
  if (!(drive.gamma_r > 0) || drive.gamma_b < 0)
    throw Error(ErrorCode::NonPositiveRate, "squeezing pumps need gamma_r > 0 and gamma_b >= 0");
  if (drive.gamma_b >= drive.gamma_r)
    throw Error(ErrorCode::UnstableSqueeze, "gamma_b must stay below gamma_r");
  if (!(kappa > 0)) throw Error(ErrorCode::NonPositiveRate, "kappa must be positive");
  SqueezeTarget t;
  t.r = std::atanh(std::sqrt(drive.gamma_b / drive.gamma_r));
  t.var_sq = 0.5 * std::exp(-2 * t.r);
  t.var_asq = 0.5 * std::exp(2 * t.r);
  t.var_sq_db = db_of_variance(t.var_sq);
  t.var_asq_db = db_of_variance(t.var_asq);
  t.coupling_G = std::sqrt(kappa / 4) * std::sqrt(drive.gamma_r - drive.gamma_b);
  t.ratio_db = drive.gamma_b > 0 ? drive.ratio_db() : -std::numeric_limits<double>::infinity();
  return t;
}

double squeezing_limit(double n_m_th, double C) {
  if (!(C > 0)) throw Error(ErrorCode::ConfigError, "cooperativity must be positive");
  if (n_m_th < 0) throw Error(ErrorCode::ConfigError, "n_m_th must be non-negative");
  return 10 * std::log10(std::sqrt((1 + 2 * n_m_th) / C));
}

SqueezedThermal squeezed_thermal_from_variances(double v_sq, double v_asq) {
  if (!(v_sq > 0) || !(v_asq > 0))
    throw Error(ErrorCode::UnphysicalVariances, "variances must be positive");
  if (v_sq > v_asq) throw Error(ErrorCode::ConfigError, "v_sq must not exceed v_asq");
  if (v_sq * v_asq < 0.25 - 1e-9)
    throw Error(ErrorCode::UnphysicalVariances, "variance product below the Heisenberg bound");
  SqueezedThermal s;
  s.n_th = std::max(std::sqrt(v_sq * v_asq) - 0.5, 0.0);
  s.r = -0.25 * std::log(v_sq / v_asq);
  return s;
}

void check_model(const DephasingModel& m) {
  if (m.Gamma_th < 0 || m.Gamma_phi < 0)
    throw Error(ErrorCode::NonPositiveRate, "Gamma_th and Gamma_phi must be non-negative");
  if (m.truncation_dim < 0) throw Error(ErrorCode::ConfigError, "truncation_dim must be >= 0");
  if (m.initial.n < 0 || !m.initial.physical(1e-9))
    throw Error(ErrorCode::UnphysicalVariances, "initial state violates the uncertainty relation");
  if (m.form == DissipatorForm::FiniteTemperature && (!(m.Gamma_m > 0) || m.n_m_th < 0))
    throw Error(ErrorCode::NonPositiveRate, "finite-temperature form needs Gamma_m > 0, n_m_th >= 0");
}

namespace {

double reference_angle(const GaussianMechState& s) {
  if (std::abs(s.b2) == 0) return std::numeric_limits<double>::quiet_NaN();
  return s.squeeze_angle();
}

void push_moments(Trajectory& tr, double t, double n, std::complex<double> b2, double axis) {
  const GaussianMechState s{n, b2};
  const double a = std::isnan(axis) ? 0.0 : axis;
  tr.t.push_back(t);
  tr.n.push_back(n);
  tr.b2.push_back(b2);
  tr.x1.push_back(s.x1_var());
  tr.x2.push_back(s.x2_var());
  tr.x_sq.push_back(s.quadrature_var(a));
  tr.x_asq.push_back(s.quadrature_var(a + std::numbers::pi / 2));
}

}  // namespace

Trajectory moments_evolve(const DephasingModel& model, const std::vector<double>& times) {
  check_model(model);
  Trajectory tr;
  tr.axis_angle = reference_angle(model.initial);
  const double n0 = model.initial.n;
  const std::complex<double> b0 = model.initial.b2;
  const double gphi = angular(model.Gamma_phi);
  for (double t : times) {
    if (t < 0) throw Error(ErrorCode::ConfigError, "times must be non-negative");
    double n;
    std::complex<double> b2;
    if (model.form == DissipatorForm::HighTemperature) {
      n = n0 + angular(model.Gamma_th) * t;
      b2 = b0 * std::exp(-4 * gphi * t);
    } else {
      const double gm = angular(model.Gamma_m);
      const double e = std::exp(-gm * t);
      n = model.n_m_th + (n0 - model.n_m_th) * e;
      b2 = b0 * std::exp(-(gm + 4 * gphi) * t);
    }
    push_moments(tr, t, n, b2, tr.axis_angle);
  }
  return tr;
}

DecoherenceRates initial_rates(const DephasingModel& model) {
  check_model(model);
  const double a = std::abs(model.initial.b2);
  double dn, db;  // d<n>/dt and d|b2|/dt over 2 pi
  if (model.form == DissipatorForm::HighTemperature) {
    dn = model.Gamma_th;
    db = -4 * model.Gamma_phi * a;
  } else {
    dn = model.Gamma_m * (model.n_m_th - model.initial.n);
    db = -(model.Gamma_m + 4 * model.Gamma_phi) * a;
  }
  DecoherenceRates r;
  r.Gamma_sq = dn - db;
  r.Gamma_asq = dn + db;
  r.Gamma_th_est = 0.5 * (r.Gamma_sq + r.Gamma_asq);
  r.delta = r.Gamma_sq - r.Gamma_asq;
  return r;
}

DecoherenceRates rates_from_trajectory(const Trajectory& traj, double window) {
  std::vector<double> t, xs, xa;
  for (size_t i = 0; i < traj.t.size(); ++i)
    if (traj.t[i] <= window * (1 + 1e-12)) {
      t.push_back(traj.t[i]);
      xs.push_back(traj.x_sq[i]);
      xa.push_back(traj.x_asq[i]);
    }
  if (t.size() < 2) throw Error(ErrorCode::DegenerateDesign, "fewer than two points in the window");
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  const Eigen::ArrayXd T = Eigen::Map<Eigen::ArrayXd>(t.data(), n);
  const auto fs = fitting::linear_fit(T, Eigen::Map<Eigen::ArrayXd>(xs.data(), n));
  const auto fa = fitting::linear_fit(T, Eigen::Map<Eigen::ArrayXd>(xa.data(), n));
  DecoherenceRates r;
  r.Gamma_sq = fs.slope / kTwoPi;
  r.Gamma_asq = fa.slope / kTwoPi;
  r.Gamma_th_est = 0.5 * (r.Gamma_sq + r.Gamma_asq);
  r.delta = r.Gamma_sq - r.Gamma_asq;
  r.Gamma_sq_err = fs.slope_err() / kTwoPi;
  r.Gamma_asq_err = fa.slope_err() / kTwoPi;
  r.delta_err = std::hypot(r.Gamma_sq_err, r.Gamma_asq_err);
  return r;
}

// ---------------------------------------------------------------------------
// Density-matrix solver. rho is Hermitian and, for the thermal and dephasing
// dissipators, every diagonal band k = m - n evolves on its own, so rho is
// stored as bands[k][n] = rho(n + k, n).

namespace {

using Band = Eigen::VectorXcd;

struct BandState {
  int dim = 0;
  std::vector<Band> bands;
  std::vector<bool> active;  // bands that are not identically zero
};

// Squeezed thermal state truncated to dim levels. The Bogoliubov number
// states are the eigenvectors of A^dag A with A = S b S^dag = b cosh r +
// b^dag sinh r, computed in a padded space.
BandState initial_bands(const GaussianMechState& init, int dim, double& trace_loss) {
  const SqueezedThermal p = init.parameters();
  const double n_th = std::max(p.n_th, 0.0);
  const double r = std::abs(init.b2) == 0 ? 0.0 : p.r;
  BandState st;
  st.dim = dim;
  st.bands.resize(dim);
  st.active.assign(dim, false);
  for (int k = 0; k < dim; ++k) st.bands[k] = Band::Zero(dim - k);

  // Thermal weights n^j / (n + 1)^{j+1}, truncated once negligible.
  std::vector<double> w;
  {
    double pj = 1 / (n_th + 1);
    const double ratio = n_th / (n_th + 1);
    while (pj > 1e-18 && static_cast<int>(w.size()) < 4 * dim + 64) {
      w.push_back(pj);
      pj *= ratio;
      if (ratio == 0) break;
    }
  }
  const int J = static_cast<int>(w.size());

  if (r == 0) {
    for (int j = 0; j < std::min(J, dim); ++j) st.bands[0][j] = w[j];
    st.active[0] = true;
  } else {
    // With the squeezed axis at angle 0, A^dag A is real and tridiagonal in
    // each parity block; the angle is restored by a phase per band.
    const int pad = dim + J + 256;
    const double c = std::cosh(r), s = std::sinh(r);
    std::vector<std::tuple<double, int, Eigen::VectorXd>> modes;
    for (int par = 0; par < 2; ++par) {
      const int sz = (pad - par + 1) / 2;
      Eigen::VectorXd d(sz), e(std::max(sz - 1, 1));
      for (int i = 0; i < sz; ++i) {
        const int m = 2 * i + par;
        d[i] = c * c * m + (m + 1 < pad ? s * s * (m + 1.0) : 0.0);
        if (i + 1 < sz) e[i] = s * c * std::sqrt((m + 1.0) * (m + 2.0));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(d, e.head(sz - 1));
      const int take = std::min(sz, J);
      for (int i = 0; i < take; ++i) modes.emplace_back(es.eigenvalues()[i], par, es.eigenvectors().col(i));
    }
    std::sort(modes.begin(), modes.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (int j = 0; j < J && j < static_cast<int>(modes.size()); ++j) {
      const auto& [ev, par, v] = modes[j];
      // rho(m, n) += w_j v(m) v(n); only same-parity pairs, so even bands.
      for (int k = 0; k < dim; k += 2) {
        Band& bk = st.bands[k];
        for (int n = par; n + k < dim; n += 2) bk[n] += w[j] * v[(n + k) / 2] * v[n / 2];
      }
    }
    for (int k = 0; k < dim; k += 2) {
      st.bands[k] *= std::polar(1.0, k * p.theta);
      st.active[k] = true;
    }
  }
  const double tr = st.bands[0].real().sum();
  trace_loss = 1 - tr;
  if (!(tr > 0)) throw Error(ErrorCode::TruncationNonConvergence, "initial state lost in truncation");
  for (int k = 0; k < dim; ++k) st.bands[k] /= tr;
  return st;
}

struct Generator {
  int dim;
  double gd, gu;  // angular rates on D[b] and D[b^dag]

  double c(int j) const { return j < dim - 1 ? j + 1.0 : 0.0; }

  void apply(int k, const Band& v, Band& out) const {
    const int len = dim - k;
    for (int n = 0; n < len; ++n) {
      std::complex<double> acc = -0.5 * (gd * (2.0 * n + k) + gu * (c(n + k) + c(n))) * v[n];
      if (n + 1 < len) acc += gd * std::sqrt((n + k + 1.0) * (n + 1.0)) * v[n + 1];
      if (n >= 1) acc += gu * std::sqrt((n + k) * static_cast<double>(n)) * v[n - 1];
      out[n] = acc;
    }
  }
};

struct Checks {
  double trace_err = 0, herm_err = 0, min_eig = std::numeric_limits<double>::infinity();
};

Checks cptp_checks(const BandState& st, bool eigen_check) {
  Checks c;
  c.trace_err = std::abs(st.bands[0].real().sum() - 1);
  c.herm_err = st.bands[0].imag().cwiseAbs().maxCoeff();
  if (!eigen_check) return c;
  const int dim = st.dim;
  bool odd = false;
  for (int k = 1; k < dim; k += 2) odd = odd || st.active[k];
  auto element = [&](int m, int n) -> std::complex<double> {
    if (m >= n) return st.bands[m - n][n];
    return std::conj(st.bands[n - m][m]);
  };
  auto min_eig = [](const Eigen::MatrixXcd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  };
  if (odd) {
    Eigen::MatrixXcd M(dim, dim);
    for (int m = 0; m < dim; ++m)
      for (int n = 0; n < dim; ++n) M(m, n) = element(m, n);
    c.min_eig = min_eig(M);
  } else {
    for (int par = 0; par < 2; ++par) {
      const int sz = (dim - par + 1) / 2;
      Eigen::MatrixXcd M(sz, sz);
      for (int i = 0; i < sz; ++i)
        for (int j = 0; j < sz; ++j) M(i, j) = element(2 * i + par, 2 * j + par);
      c.min_eig = std::min(c.min_eig, min_eig(M));
    }
  }
  return c;
}

LindbladResult run_fixed(const DephasingModel& model, const std::vector<double>& times, int dim,
                         const LindbladOptions& opts, long& terms_used) {
  LindbladResult res;
  res.dim = dim;
  BandState st = initial_bands(model.initial, dim, res.initial_trace_loss);
  Generator gen{dim, 0, 0};
  if (model.form == DissipatorForm::HighTemperature) {
    gen.gd = gen.gu = angular(model.Gamma_th);
  } else {
    gen.gd = angular(model.Gamma_m) * (model.n_m_th + 1);
    gen.gu = angular(model.Gamma_m) * model.n_m_th;
  }
  const double gphi = angular(model.Gamma_phi);
  const double q = (gen.gd + gen.gu) * dim;
  res.trajectory.axis_angle = reference_angle(model.initial);
  res.min_eigenvalue = std::numeric_limits<double>::infinity();

  auto record = [&](double t) {
    double n = 0;
    for (int i = 0; i < dim; ++i) n += i * st.bands[0][i].real();
    std::complex<double> b2 = 0;
    if (dim > 2)
      for (int i = 0; i + 2 < dim; ++i) b2 += std::sqrt((i + 1.0) * (i + 2.0)) * st.bands[2][i];
    push_moments(res.trajectory, t, n, b2, res.trajectory.axis_angle);
    res.top_population = std::max(res.top_population, std::abs(st.bands[0][dim - 1].real()));
  };
  // Trace, Hermiticity and positivity after every step.
  auto check = [&] {
    const Checks c = cptp_checks(st, opts.check_cptp);
    res.max_trace_error = std::max(res.max_trace_error, c.trace_err);
    res.max_hermiticity_error = std::max(res.max_hermiticity_error, c.herm_err);
    if (opts.check_cptp) {
      res.min_eigenvalue = std::min(res.min_eigenvalue, c.min_eig);
      if (c.trace_err > 1e-10 || c.herm_err > 1e-10 || c.min_eig < -1e-8)
        throw Error(ErrorCode::CptpViolation, "density matrix left the physical set");
    }
  };
  check();

  std::vector<Band> acc(dim), cur(dim), nxt(dim);
  double t_now = 0;
  for (double t : times) {
    if (t < t_now) throw Error(ErrorCode::ConfigError, "times must be non-decreasing and >= 0");
    double remaining = t - t_now;
    const int nsteps = q > 0 ? static_cast<int>(std::ceil(q * remaining / opts.max_step_qh)) : 0;
    for (int s = 0; s < nsteps; ++s) {
      const double h = remaining / (nsteps - s);
      const double qh = q * h;
      // Poisson-weighted series of the uniformized chain (I + L/q)^j.
      double weight = std::exp(-qh);
      for (int k = 0; k < dim; ++k) {
        if (!st.active[k]) continue;
        cur[k] = st.bands[k];
        acc[k] = weight * cur[k];
        nxt[k].resize(dim - k);
      }
      for (long j = 1;; ++j) {
        if (j > qh + 1) {
          const double x = qh / j;
          if (weight * x / (1 - x) < 1e-17) break;
        }
        if (++terms_used > opts.max_terms)
          throw Error(ErrorCode::StepRejectionOverflow, "series term budget exhausted");
        weight *= qh / j;
        for (int k = 0; k < dim; ++k) {
          if (!st.active[k]) continue;
          gen.apply(k, cur[k], nxt[k]);
          cur[k] += nxt[k] / q;
          acc[k] += weight * cur[k];
        }
      }
      for (int k = 0; k < dim; ++k)
        if (st.active[k]) st.bands[k] = acc[k] * std::exp(-gphi * k * k * h);
      remaining -= h;
      ++res.steps;
      check();
    }
    if (nsteps == 0 && remaining > 0)
      for (int k = 0; k < dim; ++k)
        if (st.active[k]) st.bands[k] *= std::exp(-gphi * k * k * remaining);
    t_now = t;
    record(t);
  }
  if (!opts.check_cptp) res.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  return res;
}

double max_rel_change(const Trajectory& a, const Trajectory& b) {
  double worst = 0;
  auto cmp = [&](const std::vector<double>& x, const std::vector<double>& y) {
    for (size_t i = 0; i < x.size(); ++i)
      worst = std::max(worst, std::abs(x[i] - y[i]) / std::max(std::abs(y[i]), 1.0));
  };
  cmp(a.n, b.n);
  cmp(a.x1, b.x1);
  cmp(a.x2, b.x2);
  cmp(a.x_sq, b.x_sq);
  cmp(a.x_asq, b.x_asq);
  return worst;
}

}  // namespace

LindbladResult lindblad_evolve(const DephasingModel& model, const std::vector<double>& times,
                               const LindbladOptions& opts) {
  check_model(model);
  long terms = 0;
  if (model.truncation_dim > 0) return run_fixed(model, times, model.truncation_dim, opts, terms);

  // Start from a dimension that holds the largest expected occupation.
  double t_max = 0;
  for (double t : times) t_max = std::max(t_max, t);
  const Trajectory guess = moments_evolve(model, {0.0, t_max});
  const double n_big = std::max(guess.n[0], guess.n[1]) + std::abs(model.initial.b2);
  int dim = 16;
  while (dim < 8 * (n_big + 1) + 16) dim *= 2;

  std::optional<LindbladResult> prev;
  while (dim <= opts.max_dim) {
    LindbladResult cur = run_fixed(model, times, dim, opts, terms);
    if (cur.top_population < opts.population_tol && prev &&
        max_rel_change(prev->trajectory, cur.trajectory) < opts.observable_tol)
      return cur;
    if (cur.top_population < opts.population_tol) prev = std::move(cur);
    dim *= 2;
  }
  throw Error(ErrorCode::TruncationNonConvergence, "Fock truncation did not converge below max_dim");
}

// ---------------------------------------------------------------------------

DephasingCurve::DephasingCurve(const SqueezedThermal& initial, double Gamma_th,
                               const DephasingOptions& opts)
    : initial_(initial), Gamma_th_(Gamma_th), opts_(opts) {
  if (initial.n_th < 0 || initial.r < 0)
    throw Error(ErrorCode::ConfigError, "initial state needs n_th >= 0 and r >= 0");
  if (initial.r == 0)
    throw Error(ErrorCode::ConfigError, "isotropic initial state: dephasing is unobservable");
  if (Gamma_th < 0) throw Error(ErrorCode::NonPositiveRate, "Gamma_th must be non-negative");
}

double DephasingCurve::operator()(double Gamma_phi) {
  for (const auto& [g, d] : cache_)
    if (g == Gamma_phi) return d;
  DephasingModel m;
  m.Gamma_th = Gamma_th_;
  m.Gamma_phi = Gamma_phi;
  m.initial = GaussianMechState::squeezed_thermal(initial_.n_th, initial_.r, initial_.theta);
  double d;
  if (opts_.window <= 0) {
    d = initial_rates(m).delta;
  } else {
    const int np = std::max(opts_.window_points, 2);
    std::vector<double> t(np);
    for (int i = 0; i < np; ++i) t[i] = opts_.window * i / (np - 1);
    d = rates_from_trajectory(moments_evolve(m, t), opts_.window).delta;
  }
  cache_.emplace_back(Gamma_phi, d);
  return d;
}

double DephasingCurve::invert(double delta) {
  if (delta <= 0) return 0.0;
  double lo = 0, hi = 1;
  double flo = (*this)(lo), fhi = (*this)(hi);
  for (int i = 0; fhi < delta; ++i) {
    if (i > 60 || fhi <= flo) throw Error(ErrorCode::NonMonotoneCurve, "rate difference not increasing");
    lo = hi;
    flo = fhi;
    hi *= 2;
    fhi = (*this)(hi);
  }
  while (hi - lo > opts_.tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = (*this)(mid);
    if (fm < flo || fm > fhi) throw Error(ErrorCode::NonMonotoneCurve, "rate difference not monotone");
    if (fm < delta) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  if (fhi == flo) return 0.5 * (lo + hi);
  return lo + (delta - flo) / (fhi - flo) * (hi - lo);
}

DephasingResult extract_dephasing(double delta, double delta_err, const SqueezedThermal& initial,
                                  double Gamma_th, const DephasingOptions& opts,
                                  const std::optional<StateUncertainty>& state_err) {
  if (delta_err < 0) throw Error(ErrorCode::ConfigError, "delta_err must be non-negative");
  DephasingCurve curve(initial, Gamma_th, opts);
  DephasingResult res;
  res.Gamma_phi = curve.invert(delta);

  const double en = state_err ? state_err->n_th_err : 0.0;
  const double er = state_err ? state_err->r_err : 0.0;
  res.lo = std::numeric_limits<double>::infinity();
  res.hi = -std::numeric_limits<double>::infinity();
  for (double sd : {-1.0, 1.0})
    for (double sn : {-1.0, 1.0})
      for (double sr : {-1.0, 1.0}) {
        SqueezedThermal c = initial;
        c.n_th = std::max(initial.n_th + sn * en, 0.0);
        c.r = std::max(initial.r + sr * er, 1e-9);
        DephasingCurve corner(c, Gamma_th, opts);
        const double g = corner.invert(std::max(delta + sd * delta_err, 0.0));
        res.lo = std::min(res.lo, g);
        res.hi = std::max(res.hi, g);
      }
  res.lo = std::max(res.lo, 0.0);

  double top = opts.curve_max > 0 ? opts.curve_max : std::max({2 * res.Gamma_phi, res.hi, 0.1});
  const int np = std::max(opts.curve_points, 2);
  for (int i = 0; i < np; ++i) {
    const double g = top * i / (np - 1);
    res.curve.emplace_back(g, curve(g));
  }
  return res;
}

DephasingResult extract_dephasing(const Trajectory& observed, const SqueezedThermal& initial,
                                  const DephasingOptions& opts,
                                  const std::optional<StateUncertainty>& state_err) {
  if (observed.t.size() < 2) throw Error(ErrorCode::DegenerateDesign, "trajectory too short");
  const double window = opts.window > 0 ? opts.window : observed.t[1];
  const DecoherenceRates r = rates_from_trajectory(observed, window);
  return extract_dephasing(r.delta, r.delta_err, initial, r.Gamma_th_est, opts, state_err);
}

}  // namespace omech::squeezing
