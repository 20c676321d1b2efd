#pragma once

// Membrane-limit figures of merit for a tensioned circular drum capacitor.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace omech::device {

struct DrumGeometry {
  double R = 0;        // drum radius, m
  double R_b = 0;      // bottom electrode radius, m
  double t = 0;        // plate thickness, m
  double d = 0;        // vacuum gap, m
  double rho = 0;      // density, kg/m^3
  double sigma_m = 0;  // tensile stress, Pa
  double Y = 0;        // Young's modulus, Pa
  std::optional<double> xi_par;  // capacitive participation ratio, from FEM
  double Q_0 = 0;      // bulk material quality factor
  double A = 2.0;      // dilution geometry factors
  double B = 0.0;
};

// Throws ConfigError when R > R_b > 0, t, d > 0 or 0 < xi_par <= 1 is violated.
void check_geometry(const DrumGeometry& g);

// 75 um aluminium drum over a 23 um electrode, 180 nm plate, 180 nm gap.
DrumGeometry paper_geometry();

// m-th positive zero of J_n, m >= 1.
double bessel_zero(int n, int m);

struct ModeShape {
  int n = 0;
  double alpha = 0;
  double R = 0;
  // J_n(alpha r / R) cos(n phi); equals 1 at the origin for n = 0.
  double operator()(double r, double phi = 0) const;
};

struct DrumMode {
  double Omega_m = 0;  // Hz
  ModeShape shape;
};

DrumMode drum_mode(const DrumGeometry& g, int n = 0, int m = 1);

struct MassResult {
  double m_eff = 0;
  double m_phys = 0;
  double xi_mass = 0;
  double x_zpf = 0;
};

// (2 / R^2) int_0^R r u(r)^2 dr for an arbitrary radial shape.
double mass_ratio(const std::function<double(double)>& u, double R);

MassResult effective_mass_xzpf(const DrumGeometry& g, double Omega_m);

struct G0Result {
  double g0 = 0;           // Hz
  double xi_cap = 0;
  double g0_closed = 0;    // compact fundamental-mode expression, Hz
  double closed_rel_diff = 0;
};

G0Result g0_theory(const DrumGeometry& g, double omega_c);

struct Dilution {
  double lambda = 0;
  double D_Q = 0;  // +inf when lambda = 0
  double Q_m = 0;
  std::vector<std::string> warnings;
};

Dilution dilution_factor(const DrumGeometry& g);

struct ModeResult {
  double Omega_m = 0;
  double m_eff = 0;
  double m_phys = 0;
  double xi_mass = 0;
  double x_zpf = 0;
  double xi_cap = 0;
  double g0 = 0;
  double lambda = 0;
  double D_Q = 0;
  double Q_m = 0;
  double Gamma_m = 0;   // Omega_m / Q_m
  double C0 = 0;        // 4 g0^2 / (kappa Gamma_m)
  double Gamma_th = 0;  // k_B T Gamma_m / (h Omega_m)
};

struct ModeContext {
  double omega_c = 5.5e9;  // Hz
  double kappa = 250e3;    // Hz
  double T_bath = 11e-3;   // K, for the high-temperature thermal rate
};

ModeResult compute_mode(const DrumGeometry& g, const ModeContext& ctx);

enum class SweepAxis { R, sigma_m, t, d };

SweepAxis sweep_axis_from_string(const std::string& s);
const char* to_string(SweepAxis a);

struct SweepRow {
  double factor = 1;
  DrumGeometry geometry;
  ModeResult mode;
};

// Scaling R scales R_b with it so the electrode covers the same fraction of the drum.
std::vector<SweepRow> scaling_sweep(const DrumGeometry& base, SweepAxis axis,
                                    const std::vector<double>& factors, const ModeContext& ctx);

// Power-law exponent of a quantity along an axis, from the scaling table.
double table_exponent(const std::string& quantity, SweepAxis axis);

// Value of a named ModeResult column.
double mode_quantity(const ModeResult& m, const std::string& quantity);

// Column order of the device CSV.
const std::vector<std::string>& mode_columns();

}  // namespace omech::device
