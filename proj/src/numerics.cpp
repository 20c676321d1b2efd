#include "omech/numerics.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace omech::numerics {

const GaussRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  for (int i = 0; i < order; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1, p1 = 0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.x[i] = -z;
    rule.w[i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    int order) {
  const GaussRule& g = gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0;
    for (int i = 0; i < order; ++i) part += g.w[i] * f(mid + 0.5 * h * g.x[i]);
    sum += 0.5 * h * part;
  }
  return sum;
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, int max_doublings, int order) {
  QuadResult r;
  int panels = 1;
  double prev = integrate_gl(f, a, b, panels, order);
  for (int k = 0; k < max_doublings; ++k) {
    panels *= 2;
    const double cur = integrate_gl(f, a, b, panels, order);
    const double scale = std::max(std::abs(cur), 1e-300);
    r.rel_change = std::abs(cur - prev) / scale;
    r.value = cur;
    r.panels = panels;
    if (r.rel_change <= rel_tol || std::abs(cur - prev) < 1e-300) {
      r.converged = true;
      return r;
    }
    prev = cur;
  }
  return r;
}

double trapezoid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  const Eigen::Index n = x.size();
  if (n < 2) return 0.0;
  const Eigen::ArrayXd dx = x.tail(n - 1) - x.head(n - 1);
  return 0.5 * (dx * (y.tail(n - 1) + y.head(n - 1))).sum();
}

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw std::domain_error("normal_quantile needs 0 < p < 1");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // One Halley refinement against erfc.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

double chi2_quantile(double p, double k) {
  const double z = normal_quantile(p);
  const double h = 2.0 / (9.0 * k);
  const double t = 1 - h + z * std::sqrt(h);
  return k * t * t * t;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

double to_unit_open(std::uint64_t bits) {
  // 53 random bits mapped into (0, 1).
  return ((bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::pair<double, double> CounterNormal::pair(std::uint64_t pair_index) const {
  const std::uint64_t base = splitmix64(seed_ ^ splitmix64(pair_index));
  const double u1 = to_unit_open(splitmix64(base));
  const double u2 = to_unit_open(splitmix64(base + 1));
  const double rad = std::sqrt(-2 * std::log(u1));
  const double ang = 2 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

double CounterNormal::operator()(std::uint64_t index) const {
  const auto pr = pair(index / 2);
  return (index % 2 == 0) ? pr.first : pr.second;
}

}  // namespace omech::numerics
