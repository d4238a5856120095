// io.hpp
// Configuration files, CSV tables, field snapshots and run manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsc/field.hpp"
#include "nsc/harness.hpp"
#include "nsc/littlewood_paley.hpp"
#include "nsc/solver.hpp"

namespace nsc::io {

namespace fs = std::filesystem;

// Invalid configuration; the message starts with the key path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// File system failure; the message names the path.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- configuration ------------------------------------------------------------

// Initial data presets. velocity: rest | shear | random | default; density (r0): none | default | random.
// A sweep file without an "initial" table gets default/default and the reference matching its kind.
struct InitialSpec {
  ReferenceDensity reference = ReferenceDensity::constant;  // constant | zonal
  std::string velocity = "shear";
  std::string density = "none";
  double kmax = 4.0;
  double velocity_amplitude = 1.0;
  double density_amplitude = 1.0;
};

struct ParsedConfig {
  SimConfig sim;
  InitialSpec initial;
  bool write_snapshots = true;
  std::optional<SweepConfig> sweep;  // present when the file has a "sweep" table
};

// Strict: unknown keys and wrong types raise ConfigError. Empty text means all defaults.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config(const fs::path& path);  // IoError when unreadable
// Fully resolved config; parse_config_text(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ParsedConfig& c);

// Deterministic in (spec, n, seed): one std::mt19937_64 seeded with seed.
InitialData build_initial_data(const InitialSpec& spec, GridPtr grid, std::uint64_t seed);

// ---- CSV ----------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_double(double v);  // %.17g
void write_csv(const fs::path& path, const CsvTable& table);
CsvTable read_csv(const fs::path& path);
// Parses a cell written by format_double; ConfigError-free, throws IoError on garbage.
double parse_double(const std::string& cell);

CsvTable ledger_table(const EnergyLedger& ledger);
CsvTable lp_property_table(const std::vector<lp::PropertyRow>& rows);
// metrics.csv: metric, epsilon, value
CsvTable metrics_table(const ConvergenceReport& report);
// rates.csv: metric, slope, residual, pass, expectation
CsvTable rates_table(const ConvergenceReport& report);

// ---- field snapshots ------------------------------------------------------------

// Header: 8-byte magic "NSCFIELD", uint32 n, uint32 representation (0 physical,
// 1 spectral), float64 t, eps, nu. Body: n*n float64 (index j*n + i, x2 row-major) or
// n*(n/2+1) complex pairs (re, im) in the r2c layout. All little-endian.
struct FieldFile {
  ScalarField field;
  double t = 0.0;
  double epsilon = 0.0;
  double nu = 0.0;
};

void write_field(const fs::path& path, const ScalarField& f, double t, double epsilon, double nu);
FieldFile read_field(const fs::path& path);

// Writes <stem>_rho.bin, <stem>_u1.bin, <stem>_u2.bin (spectral); returns the paths.
std::vector<fs::path> write_snapshot(const fs::path& dir, const std::string& stem, const Snapshot& s, double epsilon,
                                     double nu);
Snapshot read_snapshot(const fs::path& dir, const std::string& stem);

// ---- manifest -----------------------------------------------------------------

std::string sha256_file(const fs::path& path);
std::string version_string();

struct Manifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string start_time;  // ISO 8601 UTC
  std::string end_time;
  std::vector<fs::path> files;  // relative to the manifest directory
  nlohmann::json extra = nlohmann::json::object();
};

std::string utc_now();
// Writes manifest.json into dir with a sha256 per listed file.
void write_manifest(const fs::path& dir, const Manifest& m);
nlohmann::json read_json(const fs::path& path);

}  // namespace nsc::io
