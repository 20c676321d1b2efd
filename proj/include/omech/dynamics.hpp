#pragma once

// Steady states and output noise spectra of a mechanical mode cooled and
// probed by up to three microwave tones (pump, red probe, blue probe).
//
// Spectral grids are cyclic offsets f in Hz. A value S at f is the density at
// angular offset 2*pi*f, normalized so that the integral over f (not over
// omega) of the mechanical PSD equals the occupation.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "omech/core.hpp"
#include "omech/spectrum.hpp"

namespace omech::dynamics {

// n_m = n_m_th / (1 + C) + C n_c / (1 + C).
double cooling_occupation(double n_m_th, double n_c, double C);

struct SteadyState {
  BathOccupations occupations;
  double gamma_tot = 0;
  std::vector<std::string> warnings;
};

// Phonon balance with all three drives. n_c is taken from baths.n_c.
SteadyState steady_state(const SystemParams& p, const BathOccupations& baths,
                         const DriveSet& drives);

// Complex susceptibilities on a grid of offsets f (Hz). Evaluated in angular units.
struct SusceptibilitySet {
  Eigen::ArrayXcd chi_m, chi_0, chi_eff, chi_p, chi_r, chi_b;
  double g2_p = 0, g2_r = 0, g2_b = 0;  // squared linearized couplings, (rad/s)^2
};

SusceptibilitySet susceptibilities(const SystemParams& p, const DriveSet& drives,
                                   const Eigen::ArrayXd& freq);

struct MechanicalPsd {
  Spectrum spectrum;
  double integral = 0;  // numerical integral over the whole line
  int doublings = 0;    // tail-extension steps needed for convergence
  double gamma_tot = 0;
  double n_m = 0;
  std::vector<std::string> warnings;
};

// Lorentzian of full width gamma_tot centred at zero offset.
MechanicalPsd mechanical_psd(const SystemParams& p, const BathOccupations& baths,
                             const DriveSet& drives, const Eigen::ArrayXd& freq);

enum class Component { Cavity, Pump, Red, Blue };

std::string_view to_string(Component c);

struct OutputPsd {
  Eigen::ArrayXd freq;
  Eigen::ArrayXd S_c, S_p, S_r, S_b;
  double floor = 0.5;  // vacuum, device referred
  double n_m = 0;
  double n_c = 0;
  double gamma_tot = 0;
  bool simplified = false;
  std::vector<std::string> warnings;

  const Eigen::ArrayXd& component(Component c) const;
  Eigen::ArrayXd total() const { return floor + S_c + S_p + S_r + S_b; }
  // Spectrum of floor plus one component, as a spectrum analyser would see it
  // around that sideband.
  Spectrum spectrum(Component c) const;
  Spectrum total_spectrum() const;
};

// Sidebands sit at -delta_p (pump), -delta_r (red), +delta_b (blue).
OutputPsd output_psd(const SystemParams& p, const BathOccupations& baths,
                     const DriveSet& drives, const Eigen::ArrayXd& freq, bool simplified = false);

// Closed-form area (quanta/s) of a simplified component, the photon flux P_x.
double component_flux(const SystemParams& p, const BathOccupations& baths,
                      const DriveSet& drives, Component c);

struct SidebandRatios {
  double Pb_over_Pc = 0;
  double Pr_over_Pc = 0;
};

SidebandRatios sideband_ratios(double n_m, double n_c, double Gamma_r, double Gamma_b,
                               double kappa);

}  // namespace omech::dynamics
