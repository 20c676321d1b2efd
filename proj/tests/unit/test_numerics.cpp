#include <numbers>

#include "helpers.hpp"
#include "omech/numerics.hpp"

using namespace omech::numerics;

TEST_CASE("Gauss-Legendre quadrature") {
  SUBCASE("weights sum to two and integrate polynomials exactly") {
    for (int order : {4, 8, 16}) {
      const auto& g = gauss_legendre(order);
      double sw = 0, s = 0;
      for (int i = 0; i < order; ++i) {
        sw += g.w[i];
        s += g.w[i] * std::pow(g.x[i], 2 * order - 2);
      }
      CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(s == doctest::Approx(2.0 / (2 * order - 1)).epsilon(1e-12));
    }
  }
  SUBCASE("composite and adaptive rules") {
    auto f = [](double x) { return std::exp(-x) * std::sin(3 * x); };
    // Closed form of the integral over [0, pi].
    const double exact = 3.0 / 10.0 * (1 + std::exp(-std::numbers::pi));
    CHECK(integrate_gl(f, 0, std::numbers::pi, 4) == doctest::Approx(exact).epsilon(1e-13));
    const auto r = integrate_adaptive(f, 0, std::numbers::pi);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("trapezoid") {
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(11, 0, 1);
  CHECK(trapezoid(x, 3 * x + 1) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("quantiles") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(1e-6) == doctest::Approx(-4.753424308822899).epsilon(1e-8));
  // Chi-square median with 2 degrees of freedom is 2 ln 2; large k approaches k.
  CHECK(chi2_quantile(0.5, 2) == doctest::Approx(2 * std::log(2.0)).epsilon(0.01));
  CHECK(chi2_quantile(0.5, 10000) == doctest::Approx(10000 - 2.0 / 3).epsilon(1e-6));
}

TEST_CASE("counter-based normals") {
  const CounterNormal a(42), b(42), c(43);
  CHECK(a(17) == b(17));
  CHECK(a(17) != c(17));
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a(i);
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 5 / std::sqrt(double(n)));
  CHECK(std::abs(s2 / n - 1) < 5 * std::sqrt(2.0 / n));
  const auto [u, v] = a.pair(3);
  CHECK(std::isfinite(u));
  CHECK(std::isfinite(v));
  CHECK(u != v);
  CHECK(splitmix64(1) != splitmix64(2));
}
