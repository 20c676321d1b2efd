#include "omech/device.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "omech/core.hpp"
#include "omech/numerics.hpp"

namespace omech::device {

namespace {

double Jn(int n, double x) { return std::cyl_bessel_j(static_cast<double>(n), x); }

double dJn(int n, double x) {
  if (n == 0) return -Jn(1, x);
  return 0.5 * (Jn(n - 1, x) - Jn(n + 1, x));
}

double quad(const std::function<double(double)>& f, double a, double b, const char* what) {
  const auto r = numerics::integrate_adaptive(f, a, b, 1e-13, 16, 16);
  if (!r.converged || r.rel_change > 1e-10)
    throw Error(ErrorCode::QuadratureNonConvergence, what);
  return r.value;
}

}  // namespace

void check_geometry(const DrumGeometry& g) {
  if (!(g.R > g.R_b && g.R_b > 0)) throw Error(ErrorCode::ConfigError, "need R > R_b > 0");
  if (!(g.t > 0 && g.d > 0)) throw Error(ErrorCode::ConfigError, "need t > 0 and d > 0");
  if (!(g.rho > 0 && g.sigma_m > 0)) throw Error(ErrorCode::ConfigError, "need rho, sigma_m > 0");
  if (g.xi_par && !(*g.xi_par > 0 && *g.xi_par <= 1))
    throw Error(ErrorCode::ConfigError, "xi_par must lie in (0, 1]");
}

DrumGeometry paper_geometry() {
  DrumGeometry g;
  g.R = 75e-6;
  g.R_b = 23e-6;
  g.t = 180e-9;
  g.d = 180e-9;
  g.rho = 2700;
  g.sigma_m = 350e6;
  g.Y = 75e9;
  g.xi_par = 0.8;
  g.Q_0 = 4e5;
  g.A = 2.0;
  g.B = 0.0;
  return g;
}

double bessel_zero(int n, int m) {
  if (n < 0 || m < 1) throw Error(ErrorCode::InvalidModeIndex, "need n >= 0 and m >= 1");
  // Walk sign changes of J_n upward from x = n, then polish each bracket with Newton.
  const double step = 0.25;
  double a = std::max(0.5, static_cast<double>(n));
  double fa = Jn(n, a);
  int found = 0;
  for (int guard = 0; guard < 100000; ++guard) {
    const double b = a + step;
    const double fb = Jn(n, b);
    if (fa == 0 || fa * fb < 0) {
      if (++found == m) {
        if (fa == 0) return a;
        double lo = a, hi = b, flo = fa, x = 0.5 * (a + b);
        for (int it = 0; it < 200; ++it) {
          const double fx = Jn(n, x);
          if (fx == 0) return x;
          if ((flo < 0) == (fx < 0)) {
            lo = x;
            flo = fx;
          } else {
            hi = x;
          }
          double xn = x - fx / dJn(n, x);
          if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
          if (std::abs(xn - x) < 1e-15 * x) return xn;
          x = xn;
        }
        return x;
      }
    }
    a = b;
    fa = fb;
  }
  throw Error(ErrorCode::InvalidModeIndex, "Bessel zero search failed");
}

double ModeShape::operator()(double r, double phi) const {
  return Jn(n, alpha * r / R) * std::cos(n * phi);
}

DrumMode drum_mode(const DrumGeometry& g, int n, int m) {
  if (n < 0 || m < 1) throw Error(ErrorCode::InvalidModeIndex, "need n >= 0 and m >= 1");
  check_geometry(g);
  DrumMode out;
  out.shape.n = n;
  out.shape.alpha = bessel_zero(n, m);
  out.shape.R = g.R;
  out.Omega_m = out.shape.alpha / g.R * std::sqrt(g.sigma_m / g.rho) / kTwoPi;
  return out;
}

double mass_ratio(const std::function<double(double)>& u, double R) {
  const double I = quad([&](double r) { const double v = u(r); return r * v * v; }, 0, R, "xi_mass");
  return 2.0 / (R * R) * I;
}

MassResult effective_mass_xzpf(const DrumGeometry& g, double Omega_m) {
  check_geometry(g);
  if (!(Omega_m > 0)) throw Error(ErrorCode::NonPositiveFrequency, "Omega_m must be positive");
  const ModeShape u{0, bessel_zero(0, 1), g.R};
  MassResult out;
  out.xi_mass = mass_ratio([&](double r) { return u(r); }, g.R);
  out.m_phys = g.rho * std::numbers::pi * g.R * g.R * g.t;
  out.m_eff = out.xi_mass * out.m_phys;
  out.x_zpf = std::sqrt(kHbar / (2 * out.m_eff * angular(Omega_m)));
  return out;
}

G0Result g0_theory(const DrumGeometry& g, double omega_c) {
  check_geometry(g);
  if (!g.xi_par) throw Error(ErrorCode::MissingParticipation, "xi_par must be supplied");
  const DrumMode mode = drum_mode(g, 0, 1);
  const MassResult mass = effective_mass_xzpf(g, mode.Omega_m);
  G0Result out;
  const double I = quad([&](double r) { return r * mode.shape(r); }, 0, g.R_b, "xi_cap");
  out.xi_cap = 2.0 / (g.R_b * g.R_b) * I;
  out.g0 = omega_c / (2 * g.d) * out.xi_cap * *g.xi_par * mass.x_zpf;
  out.g0_closed = 0.37 * std::sqrt(kHbar) * omega_c / (2 * g.d) *
                  std::pow(g.R * g.R * g.t * g.t * g.rho * g.sigma_m, -0.25);
  out.closed_rel_diff = std::abs(out.g0_closed - out.g0) / out.g0;
  return out;
}

Dilution dilution_factor(const DrumGeometry& g) {
  check_geometry(g);
  Dilution out;
  out.lambda = g.t / (2 * g.R) * std::sqrt(g.Y / (12 * g.sigma_m));
  const double den = g.A * out.lambda + g.B * out.lambda * out.lambda;
  if (den <= 0) {
    out.D_Q = std::numeric_limits<double>::infinity();
    out.warnings.push_back("bending loss vanishes; D_Q reported as infinity");
  } else {
    out.D_Q = 1.0 / den;
  }
  out.Q_m = g.Q_0 * out.D_Q;
  return out;
}

ModeResult compute_mode(const DrumGeometry& g, const ModeContext& ctx) {
  ModeResult m;
  const DrumMode mode = drum_mode(g, 0, 1);
  const MassResult mass = effective_mass_xzpf(g, mode.Omega_m);
  const G0Result g0 = g0_theory(g, ctx.omega_c);
  const Dilution dil = dilution_factor(g);
  m.Omega_m = mode.Omega_m;
  m.m_eff = mass.m_eff;
  m.m_phys = mass.m_phys;
  m.xi_mass = mass.xi_mass;
  m.x_zpf = mass.x_zpf;
  m.xi_cap = g0.xi_cap;
  m.g0 = g0.g0;
  m.lambda = dil.lambda;
  m.D_Q = dil.D_Q;
  m.Q_m = dil.Q_m;
  m.Gamma_m = m.Omega_m / m.Q_m;
  m.C0 = 4 * m.g0 * m.g0 / (ctx.kappa * m.Gamma_m);
  m.Gamma_th = kBoltzmann * ctx.T_bath * m.Gamma_m / (kPlanck * m.Omega_m);
  return m;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "R") return SweepAxis::R;
  if (s == "sigma_m" || s == "sigma") return SweepAxis::sigma_m;
  if (s == "t") return SweepAxis::t;
  if (s == "d") return SweepAxis::d;
  throw Error(ErrorCode::ConfigError, "unknown sweep axis '" + s + "'");
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::R: return "R";
    case SweepAxis::sigma_m: return "sigma_m";
    case SweepAxis::t: return "t";
    case SweepAxis::d: return "d";
  }
  return "?";
}

std::vector<SweepRow> scaling_sweep(const DrumGeometry& base, SweepAxis axis,
                                    const std::vector<double>& factors, const ModeContext& ctx) {
  std::vector<SweepRow> rows;
  for (double f : factors) {
    if (!(f > 0)) throw Error(ErrorCode::ConfigError, "sweep factors must be positive");
    DrumGeometry g = base;
    switch (axis) {
      case SweepAxis::R:
        g.R *= f;
        g.R_b *= f;
        break;
      case SweepAxis::sigma_m: g.sigma_m *= f; break;
      case SweepAxis::t: g.t *= f; break;
      case SweepAxis::d: g.d *= f; break;
    }
    rows.push_back({f, g, compute_mode(g, ctx)});
  }
  return rows;
}

double table_exponent(const std::string& q, SweepAxis axis) {
  const int a = static_cast<int>(axis);  // R, sigma_m, t, d
  static const struct {
    const char* name;
    double e[4];
  } table[] = {
      {"Omega_m", {-1, 0.5, 0, 0}},
      {"Gamma_m", {-2, 0, 1, 0}},
      {"Q_m", {1, 0.5, -1, 0}},
      {"inv_Gamma_th", {1, 0.5, -1, 0}},
      {"g0", {-0.5, -0.25, -0.5, -1}},
      {"C0", {1, -0.5, -2, -2}},
  };
  for (const auto& row : table)
    if (q == row.name) return row.e[a];
  throw Error(ErrorCode::ConfigError, "no scaling rule for '" + q + "'");
}

double mode_quantity(const ModeResult& m, const std::string& q) {
  if (q == "Omega_m") return m.Omega_m;
  if (q == "m_eff") return m.m_eff;
  if (q == "m_phys") return m.m_phys;
  if (q == "xi_mass") return m.xi_mass;
  if (q == "x_zpf") return m.x_zpf;
  if (q == "xi_cap") return m.xi_cap;
  if (q == "g0") return m.g0;
  if (q == "lambda") return m.lambda;
  if (q == "D_Q") return m.D_Q;
  if (q == "Q_m") return m.Q_m;
  if (q == "Gamma_m") return m.Gamma_m;
  if (q == "C0") return m.C0;
  if (q == "Gamma_th") return m.Gamma_th;
  if (q == "inv_Gamma_th") return 1.0 / m.Gamma_th;
  throw Error(ErrorCode::ConfigError, "unknown mode quantity '" + q + "'");
}

const std::vector<std::string>& mode_columns() {
  static const std::vector<std::string> cols = {
      "Omega_m", "m_eff", "m_phys", "xi_mass", "x_zpf", "xi_cap", "g0",
      "lambda",  "D_Q",   "Q_m",    "Gamma_m", "C0",    "Gamma_th"};
  return cols;
}

}  // namespace omech::device
