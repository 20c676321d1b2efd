#include "omech/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "omech/error.hpp"
#include "omech/numerics.hpp"

namespace omech::fitting {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr int kWeidemanN = 40;

// Coefficients of Weideman's rational approximation, computed once by a direct DFT.
struct Weideman {
  std::array<double, kWeidemanN> a{};
  double L = 0;

  Weideman() {
    const int N = kWeidemanN, M = 2 * N, M2 = 2 * M;
    L = std::sqrt(N / std::numbers::sqrt2);
    std::vector<double> f(M2, 0.0);
    for (int j = 1; j < M2; ++j) {
      const int k = -M + j;
      const double theta = k * std::numbers::pi / M;
      const double t = L * std::tan(theta / 2);
      f[j] = std::exp(-t * t) * (L * L + t * t);
    }
    std::vector<double> g(M2);
    for (int i = 0; i < M2; ++i) g[i] = f[(i + M) % M2];
    for (int m = 1; m <= N; ++m) {
      double re = 0;
      for (int i = 0; i < M2; ++i) re += g[i] * std::cos(2 * std::numbers::pi * m * i / M2);
      a[m - 1] = re / M2;
    }
  }
};

const Weideman& weideman() {
  static const Weideman w;
  return w;
}

std::complex<double> faddeeva_upper(std::complex<double> z) {
  const std::complex<double> I(0, 1);
  if (std::abs(z) > 12.0) {
    // Laplace continued fraction, accurate far from the origin.
    std::complex<double> t = z;
    for (int k = 40; k >= 1; --k) t = z - (0.5 * k) / t;
    return I / (kSqrtPi * t);
  }
  const Weideman& W = weideman();
  const std::complex<double> Z = (W.L + I * z) / (W.L - I * z);
  std::complex<double> p = 0;
  for (int m = kWeidemanN - 1; m >= 0; --m) p = p * Z + W.a[m];
  const std::complex<double> d = W.L - I * z;
  return 2.0 * p / (d * d) + (1.0 / kSqrtPi) / d;
}

// Voigt value and its derivatives in x and gamma.
struct VoigtD {
  double v, dx, dg;
};

VoigtD voigt_with_derivs(double x, double gamma, double sigma) {
  if (sigma == 0) {
    const double d = x * x + gamma * gamma;
    const double pi = std::numbers::pi;
    return {gamma / (pi * d), -2 * x * gamma / (pi * d * d), (x * x - gamma * gamma) / (pi * d * d)};
  }
  const double s2 = sigma * std::numbers::sqrt2;
  const double norm = 1.0 / (sigma * std::sqrt(2 * std::numbers::pi));
  const std::complex<double> z(x / s2, gamma / s2);
  const std::complex<double> w = faddeeva_upper(z);
  const std::complex<double> wp = -2.0 * z * w + std::complex<double>(0, 2 / kSqrtPi);
  return {w.real() * norm, wp.real() / s2 * norm, -wp.imag() / s2 * norm};
}

struct PeakFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Eigen::ArrayXd& f;
  const Eigen::ArrayXd& y;
  double sigma;
  double c0, w0, a0, fs, yscale;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(f.size()); }

  PeakInit unpack(const Eigen::VectorXd& p) const {
    PeakInit q;
    q.center = c0 + p[0] * w0;
    q.width = w0 * std::exp(p[1]);
    q.area = p[2] * a0;
    q.floor = p[3] * fs;
    return q;
  }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    const PeakInit q = unpack(p);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double v = voigt_with_derivs(f[i] - q.center, 0.5 * q.width, sigma).v;
      r[i] = (q.area * v + q.floor - y[i]) / yscale;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    const PeakInit q = unpack(p);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const VoigtD d = voigt_with_derivs(f[i] - q.center, 0.5 * q.width, sigma);
      J(i, 0) = -q.area * d.dx * w0 / yscale;
      J(i, 1) = q.area * d.dg * 0.5 * q.width / yscale;
      J(i, 2) = d.v * a0 / yscale;
      J(i, 3) = fs / yscale;
    }
    return 0;
  }
};

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  if (z.imag() < 0) throw Error(ErrorCode::ConfigError, "faddeeva implemented for Im z >= 0");
  return faddeeva_upper(z);
}

double voigt_eval(double x, double gamma, double sigma) {
  if (!(gamma >= 0) || !(sigma >= 0))
    throw Error(ErrorCode::ConfigError, "voigt_eval needs gamma >= 0 and sigma >= 0");
  if (sigma == 0 && gamma == 0) throw Error(ErrorCode::ConfigError, "voigt_eval with zero widths");
  return voigt_with_derivs(x, gamma, sigma).v;
}

Eigen::ArrayXd voigt_eval(const Eigen::ArrayXd& x, double gamma, double sigma) {
  return x.unaryExpr([&](double v) { return voigt_eval(v, gamma, sigma); });
}

Eigen::ArrayXd peak_model(const Eigen::ArrayXd& f, const PeakInit& p, double sigma) {
  return p.area * voigt_eval(f - p.center, 0.5 * p.width, sigma) + p.floor;
}

PeakInit initial_guess(const Spectrum& spec) {
  check_spectrum(spec);
  const Eigen::Index n = spec.size();
  if (n < 8) throw Error(ErrorCode::PeakUnresolved, "too few points for a peak fit");
  const Eigen::Index edge = std::max<Eigen::Index>(1, n / 10);
  const double floor0 =
      0.5 * (spec.values.head(edge).mean() + spec.values.tail(edge).mean());
  const Eigen::ArrayXd s = spec.values - floor0;
  const double area = numerics::trapezoid(spec.freq, s);
  Eigen::Index imax;
  if (area >= 0)
    s.maxCoeff(&imax);
  else
    s.minCoeff(&imax);
  const double excursion = s[imax];

  // Centroid of the excess restricted to the half-maximum region.
  double wsum = 0, fsum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = s[i] / excursion;
    if (v >= 0.5) {
      wsum += v;
      fsum += v * spec.freq[i];
    }
  }
  PeakInit p;
  p.floor = floor0;
  p.area = area;
  p.center = wsum > 0 ? fsum / wsum : spec.freq[imax];
  // A Lorentzian has width = 2 area / (pi height). RBW blurring lowers the
  // height, so take out the Gaussian contribution in quadrature.
  const double w_eff = 2 * std::abs(area) / (std::numbers::pi * std::abs(excursion));
  const double fg = 2.3548200450309493 * rbw_sigma(spec.rbw);
  const double grid_step = (spec.freq[n - 1] - spec.freq[0]) / (n - 1);
  double w = std::sqrt(std::max(w_eff * w_eff - fg * fg, 0.0));
  w = std::max({w, 0.1 * w_eff, 1e-3 * grid_step});
  p.width = w;
  return p;
}

PeakFit fit_peak(const Spectrum& spec, PeakModel model, const std::optional<PeakInit>& init) {
  check_spectrum(spec);
  const PeakInit p0 = init ? *init : initial_guess(spec);
  const double sigma = (model == PeakModel::Voigt) ? rbw_sigma(spec.rbw) : 0.0;
  if (!(p0.width > 0)) throw Error(ErrorCode::FitNonConvergence, "initial width not positive");

  const double yscale = std::max((spec.values - p0.floor).abs().maxCoeff(), 1e-300);
  const double a0 = std::abs(p0.area) > 0 ? std::abs(p0.area) : yscale * p0.width;
  const double fs = std::max(std::abs(p0.floor), yscale);
  PeakFunctor fn{spec.freq, spec.values, sigma, p0.center, p0.width, a0, fs, yscale};

  Eigen::VectorXd x(4);
  x << 0.0, 0.0, p0.area / a0, p0.floor / fs;
  Eigen::LevenbergMarquardt<PeakFunctor> lm(fn);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.gtol = 0;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(x);
  using S = Eigen::LevenbergMarquardtSpace::Status;
  if (status == S::TooManyFunctionEvaluation || status == S::ImproperInputParameters ||
      status == S::UserAsked)
    throw Error(ErrorCode::FitNonConvergence,
                "Levenberg-Marquardt stopped with status " + std::to_string(int(status)));
  if (!x.allFinite()) throw Error(ErrorCode::FitNonConvergence, "non-finite parameters");

  const PeakInit q = fn.unpack(x);
  const Eigen::Index n = spec.size();
  Eigen::VectorXd r(n);
  fn(x, r);
  Eigen::MatrixXd J(n, 4);
  fn.df(x, J);

  // Condition number of the column-equilibrated Jacobian.
  Eigen::MatrixXd Je = J;
  for (int c = 0; c < 4; ++c) {
    const double nrm = Je.col(c).norm();
    if (nrm > 0) Je.col(c) /= nrm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Je);
  const auto sv = svd.singularValues();
  const double cond = sv[3] > 0 ? (sv[0] / sv[3]) * (sv[0] / sv[3]) : INFINITY;
  if (!(cond <= 1e12))
    throw Error(ErrorCode::IllConditioned, "normal matrix condition number " + std::to_string(cond));

  PeakFit out;
  out.center = q.center;
  out.width = q.width;
  out.area = q.area;
  out.floor = q.floor;
  out.height = 2 * q.area / (std::numbers::pi * q.width);
  out.rss = r.squaredNorm() * yscale * yscale;
  out.iterations = static_cast<int>(lm.iter);
  out.condition = cond;

  // Covariance in natural parameters: J_nat = J_scaled * D^-1 (after undoing yscale).
  const Eigen::Vector4d D(p0.width, q.width, a0, fs);
  const Eigen::MatrixXd Jn = J * yscale * D.cwiseInverse().asDiagonal();
  const double s2 = n > 4 ? out.rss / double(n - 4) : 0.0;
  const Eigen::Matrix4d JtJ = Jn.transpose() * Jn;
  out.covariance = s2 * JtJ.ldlt().solve(Eigen::Matrix4d::Identity());
  return out;
}

double integrate_peak(const Spectrum& spec, double floor_estimate) {
  check_spectrum(spec);
  const Eigen::ArrayXd s = spec.values - floor_estimate;
  const double peak = s.abs().maxCoeff();
  if (peak == 0) return 0.0;
  const Eigen::Index above = (s.abs() >= 0.5 * peak).count();
  if (above < 5)
    throw Error(ErrorCode::PeakUnresolved,
                std::to_string(above) + " points above half maximum; use fit_peak");
  return numerics::trapezoid(spec.freq, s);
}

LinearFit linear_fit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                     const std::optional<Eigen::ArrayXd>& sigma) {
  const Eigen::Index n = x.size();
  if (y.size() != n || (sigma && sigma->size() != n))
    throw Error(ErrorCode::ConfigError, "linear_fit inputs differ in length");
  if (n < 2) throw Error(ErrorCode::DegenerateDesign, "linear_fit needs at least 2 points");
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(n);
  if (sigma) {
    if (!((*sigma) > 0).all()) throw Error(ErrorCode::ConfigError, "sigma_y must be positive");
    w = sigma->square().inverse();
  }
  const double S = w.sum();
  const double Sx = (w * x).sum() / S;
  const double Sy = (w * y).sum() / S;
  const Eigen::ArrayXd dx = x - Sx;
  const double Sxx = (w * dx.square()).sum();
  if (!(Sxx > 1e-300 * S) || Sxx <= 1e-14 * S * (x.abs().maxCoeff() * x.abs().maxCoeff()))
    throw Error(ErrorCode::DegenerateDesign, "all x values coincide");

  LinearFit fit;
  fit.slope = (w * dx * (y - Sy)).sum() / Sxx;
  fit.intercept = Sy - fit.slope * Sx;
  const Eigen::ArrayXd res = y - (fit.slope * x + fit.intercept);
  fit.chi2 = (w * res.square()).sum();
  fit.dof = static_cast<int>(n - 2);

  // Covariance of (slope, intercept) for weights w.
  double var_slope = 1.0 / Sxx;
  double var_int = 1.0 / S + Sx * Sx / Sxx;
  double cov = -Sx / Sxx;
  double scale = 1.0;
  if (!sigma) scale = fit.dof > 0 ? fit.chi2 / fit.dof : 0.0;
  fit.covariance << var_slope * scale, cov * scale, cov * scale, var_int * scale;
  return fit;
}

}  // namespace omech::fitting
