#include "omech/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "omech/config.hpp"
#include "omech/error.hpp"

namespace omech::io {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaMismatch, msg); }

double meta_number(const CsvTable& t, const std::string& key) {
  try {
    return config::parse_number(t.meta.at(key));
  } catch (const Error& e) {
    schema("metadata " + key + ": " + e.what());
  }
}

void require_columns(const CsvTable& t, const std::vector<std::string>& cols, const char* kind) {
  for (const auto& c : cols)
    if (t.column(c) < 0) schema(std::string(kind) + " table lacks column '" + c + "'");
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const int c = column(name);
  if (c < 0) schema("missing column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<size_t>(c) >= rows[r].size())
      schema("row " + std::to_string(r + 1) + ", column " + name + ": missing cell");
    try {
      out.push_back(config::parse_number(rows[r][c]));
    } catch (const Error&) {
      schema("row " + std::to_string(r + 1) + ", column " + name + ": not a number '" +
             rows[r][c] + "'");
    }
  }
  return out;
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  for (double v : values) row.push_back(format_number(v));
  rows.push_back(std::move(row));
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      schema(origin + ": row " + std::to_string(t.rows.size() + 1) + " (line " +
             std::to_string(lineno) + ") has " + std::to_string(cells.size()) + " cells, expected " +
             std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) schema(origin + ": no header line");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream out;
  for (const auto& [k, v] : t.meta) out << "# " << k << "=" << v << "\n";
  for (size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  f << to_csv(t);
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  f << j.dump(2) << "\n";
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path + ": " + e.what());
  }
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "spectrum") return DatasetKind::Spectrum;
  if (s == "quadratures") return DatasetKind::Quadratures;
  if (s == "sweep") return DatasetKind::Sweep;
  if (s == "rates") return DatasetKind::Rates;
  if (s == "trajectory") return DatasetKind::Trajectory;
  if (s == "peaks") return DatasetKind::Peaks;
  if (s == "calibration") return DatasetKind::Calibration;
  throw Error(ErrorCode::ConfigError, "unknown dataset kind '" + s + "'");
}

Dataset dataset_from_table(const CsvTable& t, DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Spectrum: {
      require_columns(t, {"freq_Hz", "value"}, "spectrum");
      if (!t.meta.count("rbw_Hz")) schema("spectrum lacks rbw_Hz metadata");
      Spectrum s;
      const auto f = t.numbers("freq_Hz"), v = t.numbers("value");
      s.freq = Eigen::Map<const Eigen::ArrayXd>(f.data(), f.size());
      s.values = Eigen::Map<const Eigen::ArrayXd>(v.data(), v.size());
      s.rbw = meta_number(t, "rbw_Hz");
      if (t.meta.count("floor")) s.floor = meta_number(t, "floor");
      if (t.meta.count("reference_Hz")) s.reference = meta_number(t, "reference_Hz");
      if (t.meta.count("label")) s.label = t.meta.at("label");
      check_spectrum(s);
      return s;
    }
    case DatasetKind::Quadratures: {
      require_columns(t, {"I_uV", "Q_uV"}, "quadrature");
      tomography::QuadratureBatch b;
      const auto I = t.numbers("I_uV"), Q = t.numbers("Q_uV");
      b.samples.resize(static_cast<Eigen::Index>(I.size()), 2);
      for (size_t i = 0; i < I.size(); ++i) {
        b.samples(i, 0) = I[i];
        b.samples(i, 1) = Q[i];
      }
      if (t.meta.count("g_opt")) b.g_opt = meta_number(t, "g_opt");
      if (t.meta.count("n_add_opt")) b.n_add_opt = meta_number(t, "n_add_opt");
      if (t.meta.count("seed")) b.seed = std::stoull(t.meta.at("seed"));
      return b;
    }
    case DatasetKind::Sweep: {
      require_columns(t, {"T_K", "P_SB_meas", "P_cal_meas", "P_MW_src_W", "P_cal_src_W"}, "sweep");
      const auto T = t.numbers("T_K"), sb = t.numbers("P_SB_meas"), cm = t.numbers("P_cal_meas"),
                 mw = t.numbers("P_MW_src_W"), cs = t.numbers("P_cal_src_W");
      std::vector<calibration::SweepPoint> out;
      for (size_t i = 0; i < T.size(); ++i) out.push_back({T[i], sb[i], cm[i], mw[i], cs[i]});
      return out;
    }
    case DatasetKind::Rates: {
      require_columns(t, {"Gamma_sq_Hz", "Gamma_asq_Hz"}, "rates");
      if (t.rows.size() != 1) schema("rates table must have exactly one row");
      squeezing::DecoherenceRates r;
      r.Gamma_sq = t.numbers("Gamma_sq_Hz")[0];
      r.Gamma_asq = t.numbers("Gamma_asq_Hz")[0];
      if (t.column("Gamma_sq_err_Hz") >= 0) r.Gamma_sq_err = t.numbers("Gamma_sq_err_Hz")[0];
      if (t.column("Gamma_asq_err_Hz") >= 0) r.Gamma_asq_err = t.numbers("Gamma_asq_err_Hz")[0];
      r.Gamma_th_est = 0.5 * (r.Gamma_sq + r.Gamma_asq);
      r.delta = r.Gamma_sq - r.Gamma_asq;
      r.delta_err = std::hypot(r.Gamma_sq_err, r.Gamma_asq_err);
      return r;
    }
    case DatasetKind::Trajectory: {
      require_columns(t, {"t_s", "Xsq2", "Xasq2", "n"}, "trajectory");
      squeezing::Trajectory tr;
      tr.t = t.numbers("t_s");
      tr.x_sq = t.numbers("Xsq2");
      tr.x_asq = t.numbers("Xasq2");
      tr.n = t.numbers("n");
      for (size_t i = 0; i < tr.t.size(); ++i) {
        tr.b2.emplace_back(-0.5 * (tr.x_asq[i] - tr.x_sq[i]), 0.0);
        tr.x1.push_back(tr.x_sq[i]);
        tr.x2.push_back(tr.x_asq[i]);
      }
      return tr;
    }
    case DatasetKind::Peaks: {
      require_columns(t, {"component", "N"}, "peaks");
      const int cc = t.column("component");
      const auto N = t.numbers("N");
      std::vector<double> E(N.size(), 0.0);
      if (t.column("N_err") >= 0) E = t.numbers("N_err");
      calibration::ScaledPeaks p;
      bool have_b = false, have_c = false;
      for (size_t i = 0; i < N.size(); ++i) {
        const std::string& c = t.rows[i][cc];
        if (c == "p") {
          p.N_p = N[i];
          p.N_p_err = E[i];
        } else if (c == "r") {
          p.N_r = N[i];
          p.N_r_err = E[i];
        } else if (c == "b") {
          p.N_b = N[i];
          p.N_b_err = E[i];
          have_b = true;
        } else if (c == "c") {
          p.N_c = N[i];
          p.N_c_err = E[i];
          have_c = true;
        } else if (c == "floor") {
          p.N_floor = N[i];
        } else {
          schema("row " + std::to_string(i + 1) + ", column component: unknown '" + c + "'");
        }
      }
      if (!have_b || !have_c || (!p.N_p && !p.N_r)) schema("peaks table needs b, c and p or r rows");
      if (t.meta.count("R_Gamma")) p.R_Gamma = meta_number(t, "R_Gamma");
      if (t.meta.count("blue_correction")) p.blue_correction = meta_number(t, "blue_correction");
      return p;
    }
    case DatasetKind::Calibration: {
      require_columns(t, {"n_m", "sigma2_uV2"}, "calibration");
      const auto n = t.numbers("n_m"), s = t.numbers("sigma2_uV2");
      std::vector<double> e;
      if (t.column("sigma2_err_uV2") >= 0) e = t.numbers("sigma2_err_uV2");
      std::vector<tomography::CalibrationPoint> out;
      for (size_t i = 0; i < n.size(); ++i) {
        tomography::CalibrationPoint p;
        p.n_m = n[i];
        p.sigma2 = s[i];
        if (!e.empty()) p.sigma2_err = e[i];
        if (t.meta.count("N")) p.N = meta_number(t, "N");
        out.push_back(p);
      }
      return out;
    }
  }
  schema("unsupported dataset kind");
}

Dataset load_dataset(const std::string& path, DatasetKind kind) {
  const CsvTable t = read_csv(path);
  try {
    return dataset_from_table(t, kind);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch) schema(path + ": " + e.what());
    throw;
  }
}

CsvTable spectrum_table(const Spectrum& s) {
  CsvTable t;
  t.meta["rbw_Hz"] = format_number(s.rbw);
  t.meta["floor"] = format_number(s.floor);
  t.meta["reference_Hz"] = format_number(s.reference);
  if (!s.label.empty()) t.meta["label"] = s.label;
  t.header = {"freq_Hz", "value"};
  for (Eigen::Index i = 0; i < s.size(); ++i) t.add_row({s.freq[i], s.values[i]});
  return t;
}

CsvTable quadrature_table(const tomography::QuadratureBatch& b) {
  CsvTable t;
  t.meta["g_opt"] = format_number(b.g_opt);
  t.meta["n_add_opt"] = format_number(b.n_add_opt);
  t.meta["seed"] = std::to_string(b.seed);
  t.header = {"I_uV", "Q_uV"};
  for (Eigen::Index i = 0; i < b.count(); ++i) t.add_row({b.samples(i, 0), b.samples(i, 1)});
  return t;
}

CsvTable sweep_table(const std::vector<calibration::SweepPoint>& s) {
  CsvTable t;
  t.header = {"T_K", "P_SB_meas", "P_cal_meas", "P_MW_src_W", "P_cal_src_W"};
  for (const auto& p : s) t.add_row({p.T, p.P_SB_meas, p.P_cal_meas, p.P_MW_src, p.P_cal_src});
  return t;
}

CsvTable trajectory_table(const squeezing::Trajectory& tr) {
  CsvTable t;
  t.header = {"t_s", "Xsq2", "Xasq2", "n"};
  for (size_t i = 0; i < tr.t.size(); ++i) t.add_row({tr.t[i], tr.x_sq[i], tr.x_asq[i], tr.n[i]});
  return t;
}

CsvTable calibration_table(const std::vector<tomography::CalibrationPoint>& pts) {
  CsvTable t;
  t.header = {"n_m", "sigma2_uV2", "sigma2_err_uV2"};
  for (const auto& p : pts) t.add_row({p.n_m, p.sigma2, p.sigma2_err.value_or(0.0)});
  return t;
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["config"] = config_path;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["version"] = version;
  j["timestamp"] = timestamp;
  j["parameters"] = parameters;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace omech::io
