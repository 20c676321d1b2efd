#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace omech::numerics {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int order);

// Composite Gauss-Legendre with `panels` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    int order = 16);

struct QuadResult {
  double value = 0;
  double rel_change = 0;
  int panels = 0;
  bool converged = false;
};

// Doubles the panel count until successive estimates agree to rel_tol.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-12, int max_doublings = 14, int order = 16);

double trapezoid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

// Standard normal quantile (Acklam's rational approximation with one Newton step).
double normal_quantile(double p);

// Chi-square quantile with k degrees of freedom (Wilson-Hilferty).
double chi2_quantile(double p, double k);

// Counter-based normal deviates: the k-th value depends only on (seed, k),
// so any partition of the index range across workers reproduces it.
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed) : seed_(seed) {}
  double operator()(std::uint64_t index) const;
  // Two independent deviates from one Box-Muller pair at `pair_index`.
  std::pair<double, double> pair(std::uint64_t pair_index) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace omech::numerics
