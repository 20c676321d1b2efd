#pragma once

// Shared parameter types for a microwave cavity coupled to a mechanical mode.
//
// Every rate and frequency stored in these types is a cyclic frequency in Hz.
// Formulas that need angular units convert at the point of use, so a
// rate-times-time exponent carries exactly one factor of 2*pi.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omech/error.hpp"

namespace omech {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kHbar = kPlanck / kTwoPi;
inline constexpr double kBoltzmann = 1.380649e-23;

inline constexpr double angular(double cyclic) { return kTwoPi * cyclic; }

struct SystemParams {
  double omega_c = 0;   // cavity resonance
  double kappa = 0;     // total cavity linewidth
  double kappa_ex = 0;  // external coupling
  double kappa_0 = 0;   // internal loss
  double Omega_m = 0;   // mechanical resonance
  double Gamma_m = 0;   // intrinsic mechanical linewidth
  double g0 = 0;        // single-photon coupling

  double eta_kappa() const { return kappa_ex / kappa; }
  // (kappa / 4 Omega_m)^2, the leading correction for imperfect sideband resolution.
  double sideband_resolution() const {
    const double x = kappa / (4.0 * Omega_m);
    return x * x;
  }
  // Rate that sets the large-cooperativity bound on cooling.
  double cooperativity(double gamma_opt) const { return gamma_opt / Gamma_m; }
};

// Unvalidated input. kappa may be omitted, in which case it is derived.
struct RawSystemParams {
  double omega_c = 0;
  std::optional<double> kappa;
  double kappa_ex = 0;
  double kappa_0 = 0;
  double Omega_m = 0;
  double Gamma_m = 0;
  double g0 = 0;
};

// Checks positivity and kappa = kappa_ex + kappa_0 (relative 1e-9).
SystemParams validate_params(const RawSystemParams& raw);

// Parameters of the device measured in the reference experiment.
SystemParams paper_system_params();

struct BathOccupations {
  double n_c_th = 0;  // bath seen by the internal cavity loss
  double n_m_th = 0;  // mechanical bath
  double n_c = 0;     // resulting intracavity occupation
  double n_m = 0;     // mechanical occupation (before or after drives)
};

// n_c = (kappa_0 / kappa) n_c_th; n_m starts at the bath value.
BathOccupations make_baths(const SystemParams& p, double n_c_th, double n_m_th);

enum class DriveRole { CoolingPump = 0, RedProbe = 1, BlueProbe = 2 };

std::string_view to_string(DriveRole role);
DriveRole drive_role_from_string(std::string_view name);

struct DriveTone {
  DriveRole role = DriveRole::CoolingPump;
  double delta = 0;      // offset of the sideband from cavity resonance
  double gamma_opt = 0;  // optomechanical damping (red) or anti-damping (blue)

  bool is_blue() const { return role == DriveRole::BlueProbe; }
};

// At most one tone per role. Blue tones anti-damp.
class DriveSet {
 public:
  DriveSet() = default;

  void add(const DriveTone& tone);
  void add(DriveRole role, double delta, double gamma_opt) { add({role, delta, gamma_opt}); }

  bool has(DriveRole role) const { return tones_[static_cast<int>(role)].has_value(); }
  const DriveTone& get(DriveRole role) const;
  // Zero when the role is absent.
  double gamma(DriveRole role) const;
  double delta(DriveRole role) const;

  std::vector<DriveTone> tones() const;

  // Gamma_m + Gamma_p + Gamma_r - Gamma_b.
  double gamma_tot(double Gamma_m) const;
  // Throws UnstableDriveSet unless gamma_tot > 0.
  void check_stable(double Gamma_m) const;

 private:
  std::array<std::optional<DriveTone>, 3> tones_{};
};

// Bose-Einstein occupation at frequency freq (Hz) and temperature T (K).
double bose_occupation(double freq, double T);

// Gamma_th = Gamma_m (n_m_th + 1).
double thermal_decoherence_rate(double Gamma_m, double n_m_th);

// Inverse of the above: effective bath occupancy implied by a measured rate.
double bath_occupation_from_rates(double Gamma_th, double Gamma_m);

}  // namespace omech
