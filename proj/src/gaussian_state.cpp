#include "omech/gaussian_state.hpp"

#include <cmath>

namespace omech {

GaussianMechState GaussianMechState::squeezed_thermal(double n_th, double r, double theta) {
  GaussianMechState s;
  s.n = (n_th + 0.5) * std::cosh(2 * r) - 0.5;
  s.b2 = -(n_th + 0.5) * std::sinh(2 * r) * std::polar(1.0, 2 * theta);
  return s;
}

Eigen::Matrix2d GaussianMechState::covariance() const {
  Eigen::Matrix2d c;
  c << x1_var(), b2.imag(), b2.imag(), x2_var();
  return c;
}

double GaussianMechState::quadrature_var(double phi) const {
  return 0.5 + n + (b2 * std::polar(1.0, -2 * phi)).real();
}

double GaussianMechState::squeeze_angle() const {
  if (std::abs(b2) == 0) return 0.0;
  return 0.5 * std::arg(-b2);
}

SqueezedThermal GaussianMechState::parameters() const {
  SqueezedThermal p;
  const double vs = var_sq(), va = var_asq();
  p.n_th = std::sqrt(vs * va) - 0.5;
  p.r = 0.25 * std::log(va / vs);
  p.theta = squeeze_angle();
  return p;
}

GaussianMechState GaussianMechState::rotated(double phi) const {
  return {n, b2 * std::polar(1.0, 2 * phi)};
}

}  // namespace omech
