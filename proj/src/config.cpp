#include "omech/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "omech/error.hpp"

namespace omech::config {

namespace {

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double prefix_scale(char c) {
  switch (c) {
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'k': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    default: return 0;
  }
}

bool is_unit(const std::string& u) {
  static const char* units[] = {"Hz", "s", "K", "W", "m", "Pa", "rad", "dB", "kg/m3"};
  return std::any_of(std::begin(units), std::end(units), [&](const char* x) { return u == x; });
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr == first)
    throw Error(ErrorCode::ConfigError, "not a number: '" + text + "'");
  const std::string rest = trim(std::string_view(res.ptr, last - res.ptr));
  if (rest.empty()) return v;
  if (is_unit(rest) && rest != "m") return v;
  const double scale = prefix_scale(rest[0]);
  if (scale != 0 && (rest.size() == 1 || is_unit(rest.substr(1)))) return v * scale;
  throw Error(ErrorCode::ConfigError, "unknown suffix '" + rest + "' in '" + text + "'");
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      c.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside of a section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (c.data_[section].count(key)) fail("duplicate key '" + key + "'");
    c.data_[section][key] = val;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

bool Config::has_section(const std::string& s) const { return data_.count(s) > 0; }

bool Config::has(const std::string& s, const std::string& k) const {
  auto it = data_.find(s);
  return it != data_.end() && it->second.count(k) > 0;
}

std::string Config::get_string(const std::string& s, const std::string& k) const {
  auto it = data_.find(s);
  if (it == data_.end() || !it->second.count(k))
    throw Error(ErrorCode::ConfigError, origin_ + ": missing [" + s + "] " + k);
  return it->second.at(k);
}

double Config::get(const std::string& s, const std::string& k) const {
  const std::string v = get_string(s, k);
  try {
    return parse_number(v);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, origin_ + ": [" + s + "] " + k + ": " + e.what());
  }
}

double Config::get(const std::string& s, const std::string& k, double fallback) const {
  return has(s, k) ? get(s, k) : fallback;
}

std::optional<double> Config::find(const std::string& s, const std::string& k) const {
  if (!has(s, k)) return std::nullopt;
  return get(s, k);
}

std::vector<double> Config::get_list(const std::string& s, const std::string& k) const {
  std::vector<double> out;
  std::stringstream ss(get_string(s, k));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    try {
      out.push_back(parse_number(item));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, origin_ + ": [" + s + "] " + k + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_)
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

const std::map<std::string, std::string>& Config::section(const std::string& name) const {
  auto it = data_.find(name);
  if (it == data_.end()) throw Error(ErrorCode::ConfigError, origin_ + ": missing section [" + name + "]");
  return it->second;
}

SystemParams system_params(const Config& c) {
  const std::string s = "system";
  RawSystemParams r;
  r.omega_c = c.get(s, "omega_c");
  r.kappa = c.find(s, "kappa");
  r.kappa_ex = c.get(s, "kappa_ex");
  r.kappa_0 = c.get(s, "kappa_0");
  r.Omega_m = c.get(s, "Omega_m");
  r.Gamma_m = c.get(s, "Gamma_m");
  r.g0 = c.get(s, "g0", 0.0);
  return validate_params(r);
}

BathOccupations baths(const Config& c, const SystemParams& p) {
  const std::string s = "baths";
  double n_c_th = 0, n_m_th = 0;
  if (c.has(s, "n_c_th")) {
    n_c_th = c.get(s, "n_c_th");
  } else if (c.has(s, "T_cavity")) {
    n_c_th = bose_occupation(p.omega_c, c.get(s, "T_cavity"));
  }
  if (c.has(s, "n_m_th")) {
    n_m_th = c.get(s, "n_m_th");
  } else if (c.has(s, "T")) {
    n_m_th = bose_occupation(p.Omega_m, c.get(s, "T"));
  } else {
    throw Error(ErrorCode::ConfigError, c.origin() + ": [baths] needs n_m_th or T");
  }
  BathOccupations b = make_baths(p, n_c_th, n_m_th);
  // An explicit intracavity occupation overrides the internal-loss estimate.
  if (c.has(s, "n_c")) b.n_c = c.get(s, "n_c");
  return b;
}

DriveSet drives(const Config& c) {
  DriveSet d;
  for (const auto& name : c.sections_with_prefix("drives.")) {
    DriveRole role;
    try {
      role = drive_role_from_string(name.substr(7));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, c.origin() + ": [" + name + "]: " + e.what());
    }
    d.add(role, c.get(name, "delta"), c.get(name, "gamma_opt"));
  }
  return d;
}

device::DrumGeometry geometry(const Config& c) {
  const std::string s = "geometry";
  device::DrumGeometry g;
  g.R = c.get(s, "R");
  g.R_b = c.get(s, "R_b");
  g.t = c.get(s, "t");
  g.d = c.get(s, "d");
  g.rho = c.get(s, "rho");
  g.sigma_m = c.get(s, "sigma");
  g.Y = c.get(s, "Y");
  if (c.has(s, "xi_par")) g.xi_par = c.get(s, "xi_par");
  g.Q_0 = c.get(s, "Q_0");
  g.A = c.get(s, "A", 2.0);
  g.B = c.get(s, "B", 0.0);
  device::check_geometry(g);
  return g;
}

device::ModeContext mode_context(const Config& c) {
  device::ModeContext m;
  const std::string s = "context";
  m.omega_c = c.get(s, "omega_c", m.omega_c);
  m.kappa = c.get(s, "kappa", m.kappa);
  m.T_bath = c.get(s, "T_bath", m.T_bath);
  return m;
}

}  // namespace omech::config
