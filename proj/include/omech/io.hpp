#pragma once

// CSV datasets with "# key=value" metadata lines, JSON records and run
// manifests. Numbers are written with 17 significant digits so that a
// write/read round trip is lossless.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "omech/calibration.hpp"
#include "omech/spectrum.hpp"
#include "omech/squeezing.hpp"
#include "omech/tomography.hpp"

namespace omech::io {

using Json = nlohmann::ordered_json;

std::string format_number(double x);

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  // Numeric column; SchemaMismatch names the row and column on bad cells.
  std::vector<double> numbers(const std::string& name) const;
  void add_row(const std::vector<double>& values);
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");
std::string to_csv(const CsvTable& t);
void write_csv(const std::string& path, const CsvTable& t);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

enum class DatasetKind { Spectrum, Quadratures, Sweep, Rates, Trajectory, Peaks, Calibration };

DatasetKind dataset_kind_from_string(const std::string& s);

// Headers per kind:
//   spectrum     freq_Hz, value            meta rbw_Hz (required), floor, label
//   quadratures  I_uV, Q_uV                meta g_opt, n_add_opt, seed
//   sweep        T_K, P_SB_meas, P_cal_meas, P_MW_src_W, P_cal_src_W
//   rates        Gamma_sq_Hz, Gamma_asq_Hz, Gamma_sq_err_Hz, Gamma_asq_err_Hz
//   trajectory   t_s, Xsq2, Xasq2, n
//   peaks        component, N, N_err       components p, r, b, c, floor
//   calibration  n_m, sigma2_uV2[, sigma2_err_uV2]
using Dataset = std::variant<Spectrum, tomography::QuadratureBatch,
                             std::vector<calibration::SweepPoint>, squeezing::DecoherenceRates,
                             squeezing::Trajectory, calibration::ScaledPeaks,
                             std::vector<tomography::CalibrationPoint>>;

Dataset load_dataset(const std::string& path, DatasetKind kind);
Dataset dataset_from_table(const CsvTable& t, DatasetKind kind);

CsvTable spectrum_table(const Spectrum& s);
CsvTable quadrature_table(const tomography::QuadratureBatch& b);
CsvTable sweep_table(const std::vector<calibration::SweepPoint>& s);
CsvTable trajectory_table(const squeezing::Trajectory& t);
CsvTable calibration_table(const std::vector<tomography::CalibrationPoint>& pts);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string timestamp;
  Json parameters = Json::object();

  Json to_json() const;
};

std::string utc_timestamp();

}  // namespace omech::io
