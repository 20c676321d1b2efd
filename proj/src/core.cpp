#include "omech/core.hpp"

#include <cmath>
#include <sstream>

namespace omech {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::LinewidthMismatch: return "LinewidthMismatch";
    case ErrorCode::UnstableDriveSet: return "UnstableDriveSet";
    case ErrorCode::DuplicateDrive: return "DuplicateDrive";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::InvalidModeIndex: return "InvalidModeIndex";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::MissingParticipation: return "MissingParticipation";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::ZeroCavityOccupation: return "ZeroCavityOccupation";
    case ErrorCode::NonPositiveAmplification: return "NonPositiveAmplification";
    case ErrorCode::InvalidTimeStep: return "InvalidTimeStep";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::SingularAsymmetry: return "SingularAsymmetry";
    case ErrorCode::InconsistentBudget: return "InconsistentBudget";
    case ErrorCode::BackActionDominated: return "BackActionDominated";
    case ErrorCode::UnstableSqueeze: return "UnstableSqueeze";
    case ErrorCode::UnphysicalVariances: return "UnphysicalVariances";
    case ErrorCode::TruncationNonConvergence: return "TruncationNonConvergence";
    case ErrorCode::StepRejectionOverflow: return "StepRejectionOverflow";
    case ErrorCode::CptpViolation: return "CptpViolation";
    case ErrorCode::NonMonotoneCurve: return "NonMonotoneCurve";
    case ErrorCode::FitNonConvergence: return "FitNonConvergence";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::PeakUnresolved: return "PeakUnresolved";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::QuadratureNonConvergence:
    case ErrorCode::GridTooNarrow:
    case ErrorCode::DegenerateDesign:
    case ErrorCode::SingularAsymmetry:
    case ErrorCode::TruncationNonConvergence:
    case ErrorCode::StepRejectionOverflow:
    case ErrorCode::CptpViolation:
    case ErrorCode::NonMonotoneCurve:
    case ErrorCode::FitNonConvergence:
    case ErrorCode::IllConditioned:
    case ErrorCode::PeakUnresolved:
    case ErrorCode::UnphysicalVariances:
    case ErrorCode::BackActionDominated:
      return true;
    default:
      return false;
  }
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite, got " << v;
    throw Error(ErrorCode::NonPositiveRate, os.str());
  }
}

}  // namespace

SystemParams validate_params(const RawSystemParams& raw) {
  require_positive(raw.omega_c, "omega_c");
  require_positive(raw.kappa_ex, "kappa_ex");
  if (!(raw.kappa_0 >= 0) || !std::isfinite(raw.kappa_0))
    throw Error(ErrorCode::NonPositiveRate, "kappa_0 must be non-negative");
  require_positive(raw.Omega_m, "Omega_m");
  require_positive(raw.Gamma_m, "Gamma_m");
  require_positive(raw.g0, "g0");

  const double sum = raw.kappa_ex + raw.kappa_0;
  SystemParams p;
  p.omega_c = raw.omega_c;
  p.kappa_ex = raw.kappa_ex;
  p.kappa_0 = raw.kappa_0;
  p.Omega_m = raw.Omega_m;
  p.Gamma_m = raw.Gamma_m;
  p.g0 = raw.g0;
  if (raw.kappa) {
    require_positive(*raw.kappa, "kappa");
    if (std::abs(*raw.kappa - sum) > 1e-9 * *raw.kappa) {
      std::ostringstream os;
      os.precision(12);
      os << "kappa=" << *raw.kappa << " but kappa_ex+kappa_0=" << sum;
      throw Error(ErrorCode::LinewidthMismatch, os.str());
    }
    p.kappa = *raw.kappa;
  } else {
    p.kappa = sum;
  }
  return p;
}

SystemParams paper_system_params() {
  RawSystemParams raw;
  raw.omega_c = 5.5e9;
  raw.kappa = 250e3;
  raw.kappa_ex = 200e3;
  raw.kappa_0 = 50e3;
  raw.Omega_m = 1.8e6;
  raw.Gamma_m = 0.045;
  raw.g0 = 13.4;
  return validate_params(raw);
}

BathOccupations make_baths(const SystemParams& p, double n_c_th, double n_m_th) {
  BathOccupations b;
  b.n_c_th = n_c_th;
  b.n_m_th = n_m_th;
  b.n_c = p.kappa_0 / p.kappa * n_c_th;
  b.n_m = n_m_th;
  return b;
}

std::string_view to_string(DriveRole role) {
  switch (role) {
    case DriveRole::CoolingPump: return "cooling_pump";
    case DriveRole::RedProbe: return "red_probe";
    case DriveRole::BlueProbe: return "blue_probe";
  }
  return "unknown";
}

DriveRole drive_role_from_string(std::string_view name) {
  if (name == "cooling_pump" || name == "pump" || name == "p") return DriveRole::CoolingPump;
  if (name == "red_probe" || name == "red" || name == "r") return DriveRole::RedProbe;
  if (name == "blue_probe" || name == "blue" || name == "b") return DriveRole::BlueProbe;
  throw Error(ErrorCode::ConfigError, "unknown drive role '" + std::string(name) + "'");
}

void DriveSet::add(const DriveTone& tone) {
  auto& slot = tones_[static_cast<int>(tone.role)];
  if (slot) throw Error(ErrorCode::DuplicateDrive, std::string(to_string(tone.role)) + " already set");
  if (!(tone.gamma_opt >= 0) || !std::isfinite(tone.gamma_opt))
    throw Error(ErrorCode::NonPositiveRate, "gamma_opt must be non-negative");
  slot = tone;
}

const DriveTone& DriveSet::get(DriveRole role) const {
  const auto& slot = tones_[static_cast<int>(role)];
  if (!slot) throw Error(ErrorCode::ConfigError, std::string(to_string(role)) + " not present");
  return *slot;
}

double DriveSet::gamma(DriveRole role) const {
  const auto& slot = tones_[static_cast<int>(role)];
  return slot ? slot->gamma_opt : 0.0;
}

double DriveSet::delta(DriveRole role) const {
  const auto& slot = tones_[static_cast<int>(role)];
  return slot ? slot->delta : 0.0;
}

std::vector<DriveTone> DriveSet::tones() const {
  std::vector<DriveTone> out;
  for (const auto& t : tones_)
    if (t) out.push_back(*t);
  return out;
}

double DriveSet::gamma_tot(double Gamma_m) const {
  return Gamma_m + gamma(DriveRole::CoolingPump) + gamma(DriveRole::RedProbe) -
         gamma(DriveRole::BlueProbe);
}

void DriveSet::check_stable(double Gamma_m) const {
  const double g = gamma_tot(Gamma_m);
  if (!(g > 0)) {
    std::ostringstream os;
    os << "total mechanical damping " << g << " Hz is not positive";
    throw Error(ErrorCode::UnstableDriveSet, os.str());
  }
}

double bose_occupation(double freq, double T) {
  if (!(freq > 0)) throw Error(ErrorCode::NonPositiveFrequency, "bose_occupation needs freq > 0");
  if (T < 0) throw Error(ErrorCode::ConfigError, "negative temperature");
  if (T == 0) return 0.0;
  const double x = kPlanck * freq / (kBoltzmann * T);
  return 1.0 / std::expm1(x);
}

double thermal_decoherence_rate(double Gamma_m, double n_m_th) {
  if (!(Gamma_m > 0)) throw Error(ErrorCode::NonPositiveRate, "Gamma_m must be positive");
  return Gamma_m * (n_m_th + 1.0);
}

double bath_occupation_from_rates(double Gamma_th, double Gamma_m) {
  if (!(Gamma_m > 0)) throw Error(ErrorCode::NonPositiveRate, "Gamma_m must be positive");
  return Gamma_th / Gamma_m - 1.0;
}

}  // namespace omech
