#pragma once

// Line-shape models and estimators for spectra and calibration lines.

#include <complex>
#include <optional>

#include <Eigen/Core>

#include "omech/spectrum.hpp"

namespace omech::fitting {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
std::complex<double> faddeeva(std::complex<double> z);

// Unit-area Voigt profile: a Lorentzian gamma / (pi (x^2 + gamma^2)) with
// half width gamma convolved with a Gaussian of standard deviation sigma.
// sigma = 0 returns the Lorentzian.
double voigt_eval(double x, double gamma, double sigma);
Eigen::ArrayXd voigt_eval(const Eigen::ArrayXd& x, double gamma, double sigma);

// Gaussian width of a spectrum analyser resolution filter.
inline double rbw_sigma(double rbw) { return rbw / 2.5066282746310002; }

enum class PeakModel { Lorentzian, Voigt };

// Peak parameterized by its full width at half maximum `width` and its area.
// height = 2 area / (pi width) is the Lorentzian maximum before blurring.
struct PeakFit {
  double center = 0;
  double width = 0;
  double height = 0;
  double area = 0;
  double floor = 0;
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // (center, width, area, floor)
  double rss = 0;
  int iterations = 0;
  double condition = 0;

  double center_err() const { return std::sqrt(covariance(0, 0)); }
  double width_err() const { return std::sqrt(covariance(1, 1)); }
  double area_err() const { return std::sqrt(covariance(2, 2)); }
  double floor_err() const { return std::sqrt(covariance(3, 3)); }
};

struct PeakInit {
  double center = 0;
  double width = 0;
  double area = 0;
  double floor = 0;
};

// Moment-based starting point: floor from the outer 10% of the grid, centroid
// and zeroth moment of the excess, width from area over peak excursion.
PeakInit initial_guess(const Spectrum& spec);

Eigen::ArrayXd peak_model(const Eigen::ArrayXd& f, const PeakInit& p, double sigma);

// Levenberg-Marquardt over (center, width, area, floor); sigma fixed by spec.rbw
// for the Voigt model.
PeakFit fit_peak(const Spectrum& spec, PeakModel model,
                 const std::optional<PeakInit>& init = std::nullopt);

// Trapezoid of (value - floor). Throws PeakUnresolved if fewer than five
// points lie above half the maximum excursion.
double integrate_peak(const Spectrum& spec, double floor_estimate);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (slope, intercept)
  double chi2 = 0;
  int dof = 0;

  double slope_err() const { return std::sqrt(covariance(0, 0)); }
  double intercept_err() const { return std::sqrt(covariance(1, 1)); }
};

// Weighted least squares when sigma is given, otherwise ordinary least squares
// with the covariance scaled by the residual variance.
LinearFit linear_fit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                     const std::optional<Eigen::ArrayXd>& sigma = std::nullopt);

}  // namespace omech::fitting
