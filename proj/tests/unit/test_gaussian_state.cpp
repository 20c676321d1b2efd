#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "omech/gaussian_state.hpp"

using namespace omech;

namespace {

// Covariance of a rotated thermal state with squeezed variances along theta.
Eigen::Matrix2d covariance_oracle(double n_th, double r, double theta) {
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::Vector2d d((n_th + 0.5) * std::exp(-2 * r), (n_th + 0.5) * std::exp(2 * r));
  return R * d.asDiagonal() * R.transpose();
}

}  // namespace

TEST_CASE("vacuum and thermal states") {
  const auto v = GaussianMechState::vacuum();
  CHECK(v.x1_var() == 0.5);
  CHECK(v.x2_var() == 0.5);
  CHECK(v.physical());
  const auto t = GaussianMechState::thermal(2.5);
  CHECK(t.quadrature_var(0.3) == doctest::Approx(3.0));
  const auto p = t.parameters();
  CHECK(p.n_th == doctest::Approx(2.5));
  CHECK(p.r == 0.0);
}

TEST_CASE("squeezed thermal covariance matches the symplectic construction") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> un(0, 3), ur(0, 1.5), ut(-1.5, 1.5);
  for (int k = 0; k < 200; ++k) {
    const double n = un(rng), r = ur(rng), th = ut(rng);
    const auto s = GaussianMechState::squeezed_thermal(n, r, th);
    const Eigen::Matrix2d c = s.covariance(), o = covariance_oracle(n, r, th);
    CHECK((c - o).cwiseAbs().maxCoeff() < 1e-12 * (1 + o.norm()));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(o);
    CHECK(s.var_sq() == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-12));
    CHECK(s.var_asq() == doctest::Approx(es.eigenvalues()[1]).epsilon(1e-12));
    CHECK(s.quadrature_var(th) == doctest::Approx(s.var_sq()).epsilon(1e-12));
    CHECK(s.var_sq() * s.var_asq() == doctest::Approx((n + 0.5) * (n + 0.5)).epsilon(1e-12));
    CHECK(s.physical());
    const auto p = s.parameters();
    CHECK(p.n_th == doctest::Approx(n).epsilon(1e-9));
    CHECK(p.r == doctest::Approx(r).epsilon(1e-9));
    if (r > 1e-3) {
      // The squeezed axis is defined modulo pi.
      const double d = std::remainder(p.theta - th, std::numbers::pi);
      CHECK(std::abs(d) < 1e-9);
    }
  }
}

TEST_CASE("quadrature variance against the covariance") {
  const auto s = GaussianMechState::squeezed_thermal(0.4, 0.6, 0.3);
  const Eigen::Matrix2d c = s.covariance();
  for (double phi = -3; phi < 3; phi += 0.25) {
    const Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    CHECK(s.quadrature_var(phi) == doctest::Approx(u.dot(c * u)).epsilon(1e-13));
  }
}

TEST_CASE("rotation") {
  const auto s = GaussianMechState::squeezed_thermal(0.4, 0.6, 0.1);
  const auto r = s.rotated(0.5);
  CHECK(r.n == s.n);
  CHECK(r.var_sq() == doctest::Approx(s.var_sq()).epsilon(1e-14));
  CHECK(r.quadrature_var(0.7) == doctest::Approx(s.quadrature_var(0.2)).epsilon(1e-13));
  CHECK(std::remainder(r.squeeze_angle() - 0.6, std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unphysical states are flagged") {
  GaussianMechState s;
  s.n = 0.1;
  s.b2 = 0.5;
  CHECK_FALSE(s.physical());
}
