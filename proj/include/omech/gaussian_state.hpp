#pragma once

// Zero-mean Gaussian state of one mechanical mode in terms of <b^dag b> and
// <b^2>. Quadratures are X1 = (b + b^dag)/sqrt(2), X2 = (b - b^dag)/(i sqrt(2)),
// so vacuum has variance 1/2.

#include <complex>

#include <Eigen/Core>

namespace omech {

struct SqueezedThermal {
  double n_th = 0;
  double r = 0;
  double theta = 0;  // angle of the squeezed quadrature
};

struct GaussianMechState {
  double n = 0;
  std::complex<double> b2 = 0;

  static GaussianMechState vacuum() { return {}; }
  static GaussianMechState thermal(double n_th) { return {n_th, 0.0}; }
  // S(r, theta) rho_th S^dag, squeezed along the axis at angle theta.
  static GaussianMechState squeezed_thermal(double n_th, double r, double theta = 0);

  // Covariance of (X1, X2).
  Eigen::Matrix2d covariance() const;
  double x1_var() const { return 0.5 + n + b2.real(); }
  double x2_var() const { return 0.5 + n - b2.real(); }
  // Variance of X_phi = X1 cos(phi) + X2 sin(phi).
  double quadrature_var(double phi) const;

  // Principal-axis variances (squeezed first) and the squeezed-axis angle.
  double var_sq() const { return 0.5 + n - std::abs(b2); }
  double var_asq() const { return 0.5 + n + std::abs(b2); }
  double squeeze_angle() const;

  SqueezedThermal parameters() const;
  // Heisenberg: var_sq * var_asq >= 1/4.
  bool physical(double tol = 1e-12) const { return var_sq() * var_asq() >= 0.25 - tol; }

  GaussianMechState rotated(double phi) const;
};

}  // namespace omech
