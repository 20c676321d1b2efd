#include "omech/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "omech/numerics.hpp"

namespace omech {

void check_spectrum(const Spectrum& s) {
  if (s.freq.size() != s.values.size())
    throw Error(ErrorCode::SchemaMismatch, "freq and values differ in length");
  for (Eigen::Index i = 1; i < s.freq.size(); ++i)
    if (!(s.freq[i] > s.freq[i - 1]))
      throw Error(ErrorCode::SchemaMismatch,
                  "frequency grid not strictly increasing at row " + std::to_string(i));
  if (!s.values.allFinite()) throw Error(ErrorCode::SchemaMismatch, "non-finite PSD value");
  if (s.rbw < 0) throw Error(ErrorCode::SchemaMismatch, "negative rbw");
}

Eigen::ArrayXd uniform_grid(double center, double half_width, Eigen::Index n) {
  if (n < 2) throw Error(ErrorCode::ConfigError, "grid needs at least 2 points");
  return Eigen::ArrayXd::LinSpaced(n, center - half_width, center + half_width);
}

}  // namespace omech

namespace omech::dynamics {

namespace {

struct AngularRates {
  double kappa, Gm, Gp, Gr, Gb, Gtot, dp, dr, db;
};

AngularRates angular_rates(const SystemParams& p, const DriveSet& d) {
  AngularRates a;
  a.kappa = angular(p.kappa);
  a.Gm = angular(p.Gamma_m);
  a.Gp = angular(d.gamma(DriveRole::CoolingPump));
  a.Gr = angular(d.gamma(DriveRole::RedProbe));
  a.Gb = angular(d.gamma(DriveRole::BlueProbe));
  a.Gtot = a.Gm + a.Gp + a.Gr - a.Gb;
  a.dp = angular(d.delta(DriveRole::CoolingPump));
  a.dr = angular(d.delta(DriveRole::RedProbe));
  a.db = angular(d.delta(DriveRole::BlueProbe));
  return a;
}

void weak_coupling_warning(double gamma_tot, double kappa, std::vector<std::string>& w) {
  if (gamma_tot / kappa > 0.01) {
    std::ostringstream os;
    os << "WeakCouplingViolated: Gamma_tot/kappa = " << gamma_tot / kappa << " > 0.01";
    w.push_back(os.str());
  }
}

}  // namespace

double cooling_occupation(double n_m_th, double n_c, double C) {
  if (n_m_th < 0 || n_c < 0 || C < 0)
    throw Error(ErrorCode::ConfigError, "cooling_occupation needs non-negative inputs");
  return n_m_th / (1 + C) + C / (1 + C) * n_c;
}

SteadyState steady_state(const SystemParams& p, const BathOccupations& baths,
                         const DriveSet& drives) {
  drives.check_stable(p.Gamma_m);
  SteadyState s;
  s.gamma_tot = drives.gamma_tot(p.Gamma_m);
  const double Gp = drives.gamma(DriveRole::CoolingPump);
  const double Gr = drives.gamma(DriveRole::RedProbe);
  const double Gb = drives.gamma(DriveRole::BlueProbe);
  const double nc = baths.n_c;
  s.occupations = baths;
  s.occupations.n_m =
      (Gp * nc + p.Gamma_m * baths.n_m_th + Gr * nc + Gb * (nc + 1)) / s.gamma_tot;
  weak_coupling_warning(s.gamma_tot, p.kappa, s.warnings);
  return s;
}

SusceptibilitySet susceptibilities(const SystemParams& p, const DriveSet& drives,
                                   const Eigen::ArrayXd& freq) {
  const AngularRates a = angular_rates(p, drives);
  const std::complex<double> I(0, 1);
  const Eigen::ArrayXcd w = (kTwoPi * freq).cast<std::complex<double>>();
  SusceptibilitySet s;
  s.g2_p = a.Gp * a.kappa / 4;
  s.g2_r = a.Gr * a.kappa / 4;
  s.g2_b = a.Gb * a.kappa / 4;
  s.chi_m = (-I * w + a.Gm / 2).inverse();
  s.chi_0 = (-I * w + a.kappa / 2).inverse();
  s.chi_p = (-I * (w - a.dp) + a.kappa / 2).inverse();
  s.chi_r = (-I * (w - a.dr) + a.kappa / 2).inverse();
  s.chi_b = (-I * (w - a.db) + a.kappa / 2).inverse();
  s.chi_eff = (s.chi_m.inverse() + s.chi_p * s.g2_p + s.chi_r * s.g2_r - s.chi_b * s.g2_b).inverse();
  return s;
}

MechanicalPsd mechanical_psd(const SystemParams& p, const BathOccupations& baths,
                             const DriveSet& drives, const Eigen::ArrayXd& freq) {
  if (freq.size() < 2) throw Error(ErrorCode::GridTooNarrow, "grid needs at least 2 points");
  const SteadyState ss = steady_state(p, baths, drives);
  MechanicalPsd out;
  out.warnings = ss.warnings;
  out.gamma_tot = ss.gamma_tot;
  out.n_m = ss.occupations.n_m;
  const double G = angular(ss.gamma_tot);
  const double n = out.n_m;
  auto lor = [G, n](double f) {
    const double w = kTwoPi * f;
    return G / (w * w + 0.25 * G * G) * n;
  };

  out.spectrum.freq = freq;
  out.spectrum.values = freq.unaryExpr(lor);
  out.spectrum.label = "S_bb";

  // Integrate on the grid span, then add symmetric tail segments [W, 2W].
  const double lo = freq[0];
  const double hi = freq[freq.size() - 1];
  auto seg = [&](double a, double b) {
    const auto r = numerics::integrate_adaptive(lor, a, b, 1e-12, 20);
    if (!r.converged) throw Error(ErrorCode::QuadratureNonConvergence, "PSD segment integral");
    return r.value;
  };
  double total = seg(lo, hi);
  double wl = -lo, wh = hi;
  const double center_span = std::max(std::abs(lo), std::abs(hi));
  if (wl <= 0) wl = center_span;
  if (wh <= 0) wh = center_span;
  bool converged = false;
  int k = 0;
  // Lorentzian tails halve per doubling, so the neglected remainder is about
  // the last segment added.
  for (; k < 48; ++k) {
    const double left = seg(-2 * wl, -wl);
    const double right = seg(wh, 2 * wh);
    const double added = left + right;
    total += added;
    wl *= 2;
    wh *= 2;
    if (std::abs(added) < 1e-7 * std::abs(total)) {
      converged = true;
      ++k;
      break;
    }
  }
  if (n != 0 && !converged)
    throw Error(ErrorCode::GridTooNarrow, "tail contribution not below 1e-7 after 48 doublings");
  out.integral = total;
  out.doublings = k;
  return out;
}

std::string_view to_string(Component c) {
  switch (c) {
    case Component::Cavity: return "c";
    case Component::Pump: return "p";
    case Component::Red: return "r";
    case Component::Blue: return "b";
  }
  return "?";
}

const Eigen::ArrayXd& OutputPsd::component(Component c) const {
  switch (c) {
    case Component::Cavity: return S_c;
    case Component::Pump: return S_p;
    case Component::Red: return S_r;
    case Component::Blue: return S_b;
  }
  return S_c;
}

Spectrum OutputPsd::spectrum(Component c) const {
  Spectrum s;
  s.freq = freq;
  s.values = floor + component(c);
  s.floor = floor;
  s.label = std::string("S_") + std::string(to_string(c));
  return s;
}

Spectrum OutputPsd::total_spectrum() const {
  Spectrum s;
  s.freq = freq;
  s.values = total();
  s.floor = floor;
  s.label = "S_total";
  return s;
}

OutputPsd output_psd(const SystemParams& p, const BathOccupations& baths, const DriveSet& drives,
                     const Eigen::ArrayXd& freq, bool simplified) {
  const SteadyState ss = steady_state(p, baths, drives);
  const AngularRates a = angular_rates(p, drives);
  const double eta = p.eta_kappa();
  const double nc = baths.n_c;
  const double nth = baths.n_m_th;
  const double nm = ss.occupations.n_m;

  OutputPsd out;
  out.freq = freq;
  out.simplified = simplified;
  out.n_m = nm;
  out.n_c = nc;
  out.gamma_tot = ss.gamma_tot;
  out.warnings = ss.warnings;

  const Eigen::ArrayXd w = kTwoPi * freq;
  const Eigen::ArrayXd cav = (1.0 + 4.0 * w.square() / (a.kappa * a.kappa)).inverse();
  out.S_c = 4.0 * eta * nc * cav;

  const double Gt = a.Gtot;
  // sign = -1 for sidebands centred at -delta (pump, red), +1 for blue.
  auto sideband = [&](double G, double delta, double sign, double occupation) -> Eigen::ArrayXd {
    if (G == 0) return Eigen::ArrayXd::Zero(freq.size());
    const Eigen::ArrayXd wd = w - sign * delta;
    if (simplified) return eta * G * Gt / (0.25 * Gt * Gt + wd.square()) * occupation;

    const double Gopt = a.Gp + a.Gr - a.Gb;
    const Eigen::ArrayXd cav_inv = 1.0 + 4.0 * w.square() / (a.kappa * a.kappa);
    // |Gopt/2 + (1 - 2i w/kappa)(Gm/2 - i wd)|^2
    const Eigen::ArrayXd re = 0.5 * Gopt + 0.5 * a.Gm - 2.0 * w / a.kappa * wd;
    const Eigen::ArrayXd im = -wd - w / a.kappa * a.Gm;
    const Eigen::ArrayXd den = re.square() + im.square();
    const Eigen::ArrayXd u = 4.0 * w * wd / (a.kappa * Gt);
    const Eigen::ArrayXd bath =
        (a.Gp * nc + a.Gr * nc + a.Gb * (nc + 1) + a.Gm * cav_inv * nth) / Gt;
    const Eigen::ArrayXd interference = (1.0 - u) * (2 * nc + 1) - (0.5 - u);
    const Eigen::ArrayXd vac = (Gopt + a.Gm * cav_inv) / (2 * Gt);
    const double s = (sign > 0) ? 1.0 : -1.0;
    return eta * G * Gt / den * cav * (bath + s * interference + vac);
  };
  out.S_p = sideband(a.Gp, a.dp, -1, nm - 2 * nc);
  out.S_r = sideband(a.Gr, a.dr, -1, nm - 2 * nc);
  out.S_b = sideband(a.Gb, a.db, +1, nm + 2 * nc + 1);

  // Sideband centres in Hz, for the overlap check.
  std::vector<std::pair<std::string, double>> centres;
  if (drives.has(DriveRole::CoolingPump)) centres.emplace_back("p", -drives.delta(DriveRole::CoolingPump));
  if (drives.has(DriveRole::RedProbe)) centres.emplace_back("r", -drives.delta(DriveRole::RedProbe));
  if (drives.has(DriveRole::BlueProbe)) centres.emplace_back("b", drives.delta(DriveRole::BlueProbe));
  for (size_t i = 0; i < centres.size(); ++i)
    for (size_t j = i + 1; j < centres.size(); ++j)
      if (std::abs(centres[i].second - centres[j].second) < 10 * ss.gamma_tot) {
        out.warnings.push_back("OverlapWarning: sidebands " + centres[i].first + " and " +
                               centres[j].first + " closer than 10 Gamma_tot");
      }
  return out;
}

double component_flux(const SystemParams& p, const BathOccupations& baths, const DriveSet& drives,
                      Component c) {
  const SteadyState ss = steady_state(p, baths, drives);
  const double eta = p.eta_kappa();
  const double nc = baths.n_c;
  const double nm = ss.occupations.n_m;
  switch (c) {
    case Component::Cavity: return kTwoPi * p.kappa_ex * nc;
    case Component::Pump: return eta * angular(drives.gamma(DriveRole::CoolingPump)) * (nm - 2 * nc);
    case Component::Red: return eta * angular(drives.gamma(DriveRole::RedProbe)) * (nm - 2 * nc);
    case Component::Blue: return eta * angular(drives.gamma(DriveRole::BlueProbe)) * (nm + 2 * nc + 1);
  }
  return 0;
}

SidebandRatios sideband_ratios(double n_m, double n_c, double Gamma_r, double Gamma_b, double kappa) {
  if (!(n_c > 0))
    throw Error(ErrorCode::ZeroCavityOccupation, "sideband ratios need n_c > 0");
  SidebandRatios r;
  r.Pb_over_Pc = Gamma_b / kappa * (n_m + 1 + 2 * n_c) / n_c;
  r.Pr_over_Pc = Gamma_r / kappa * (n_m - 2 * n_c) / n_c;
  return r;
}

}  // namespace omech::dynamics
