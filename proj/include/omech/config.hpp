#pragma once

// Key-value configuration files:
//
//   # comment
//   [system]
//   omega_c = 5.5 GHz
//   kappa_ex = 200k
//   [drives.cooling_pump]
//   gamma_opt = 288
//
// Numbers are SI with an optional prefix (p n u m k M G) and an optional unit
// word that is ignored (Hz, s, K, W, m, Pa, rad, dB, kg/m3). A bare "m" is
// milli; lengths in metres are written without a suffix or as "um", "nm".

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omech/core.hpp"
#include "omech/device.hpp"

namespace omech::config {

// Parses "250k", "5.5 GHz", "45 mHz", "1e-3". Throws ConfigError.
double parse_number(const std::string& text);

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  double get(const std::string& section, const std::string& key) const;
  double get(const std::string& section, const std::string& key, double fallback) const;
  std::optional<double> find(const std::string& section, const std::string& key) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;
  // Section names starting with prefix, e.g. "drives.".
  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;
  const std::map<std::string, std::string>& section(const std::string& name) const;
  const std::map<std::string, std::map<std::string, std::string>>& all() const { return data_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::string origin_;
};

SystemParams system_params(const Config& c);
// [baths] n_c_th, n_m_th (or T, converted with the Bose occupation).
BathOccupations baths(const Config& c, const SystemParams& p);
// [drives.<role>] delta, gamma_opt.
DriveSet drives(const Config& c);
device::DrumGeometry geometry(const Config& c);
device::ModeContext mode_context(const Config& c);

}  // namespace omech::config
