#include "nsc/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "nsc/operators.hpp"

namespace nsc::io {

using nlohmann::json;

namespace {

// Strict reader over one JSON table.
class Table {
 public:
  Table(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(name("") + ": expected a table");
  }

  std::string name(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(name(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(name(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(name(key) + ": expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(name(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(name(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  // Raises on keys that were never looked up.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(key + ": '" + value + "' is not one of " + list);
}

std::string reference_name(ReferenceDensity r) {
  switch (r) {
    case ReferenceDensity::constant: return "constant";
    case ReferenceDensity::zonal: return "zonal";
    case ReferenceDensity::custom: return "custom";
  }
  return "constant";
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  json root;
  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (blank) {
    root = json::object();
  } else {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("syntax error: ") + e.what());
    }
  }
  ParsedConfig c;
  Table top(root, "");
  SimConfig& s = c.sim;
  top.get("epsilon", s.epsilon);
  top.get("nu", s.nu);
  top.get("n", s.n);
  top.get("t_end", s.t_end);
  top.get("density_floor", s.density_floor);
  top.get("dealias", s.dealias);
  top.get("hyperdiffusion", s.hyperdiffusion);
  top.get("snapshot_interval", s.snapshot_interval);
  top.get("seed", s.seed);
  if (const json* j = top.find("time_step")) {
    Table t(*j, "time_step");
    t.get("cfl_number", s.dt_policy.cfl_number);
    t.get("coriolis_fraction", s.dt_policy.coriolis_fraction);
    t.get("dt_max", s.dt_policy.dt_max);
    t.finish();
  }
  if (const json* j = top.find("elliptic")) {
    Table t(*j, "elliptic");
    t.get("tol", s.elliptic_tol);
    t.get("max_iter", s.elliptic_max_iter);
    t.finish();
  }
  const json* initial = top.find("initial");
  if (initial) {
    Table t(*initial, "initial");
    std::string ref = "constant";
    t.get("reference", ref);
    one_of("initial.reference", ref, {"constant", "zonal"});
    c.initial.reference = ref == "zonal" ? ReferenceDensity::zonal : ReferenceDensity::constant;
    t.get("velocity", c.initial.velocity);
    one_of("initial.velocity", c.initial.velocity, {"rest", "shear", "random", "default"});
    t.get("density", c.initial.density);
    one_of("initial.density", c.initial.density, {"none", "default", "random"});
    t.get("kmax", c.initial.kmax);
    if (!(c.initial.kmax >= 1.0)) throw ConfigError("initial.kmax: must be at least 1");
    t.get("velocity_amplitude", c.initial.velocity_amplitude);
    t.get("density_amplitude", c.initial.density_amplitude);
    t.finish();
  }
  if (const json* j = top.find("output")) {
    Table t(*j, "output");
    t.get("snapshots", c.write_snapshots);
    t.finish();
  }
  if (const json* j = top.find("sweep")) {
    Table t(*j, "sweep");
    SweepConfig w;
    std::string kind = "hom";
    t.get("kind", kind);
    one_of("sweep.kind", kind, {"hom", "dens"});
    w.kind = kind == "hom" ? SweepKind::hom : SweepKind::dens;
    if (const json* e = t.find("epsilons")) {
      if (!e->is_array()) throw ConfigError("sweep.epsilons: expected a list of numbers");
      w.epsilons.clear();
      for (const auto& v : *e) {
        if (!v.is_number()) throw ConfigError("sweep.epsilons: expected a list of numbers");
        w.epsilons.push_back(v.get<double>());
      }
    }
    if (const json* m = t.find("metrics")) {
      if (!m->is_array()) throw ConfigError("sweep.metrics: expected a list of names");
      std::vector<std::string> names;
      for (const auto& v : *m) {
        if (!v.is_string()) throw ConfigError("sweep.metrics: expected a list of names");
        names.push_back(v.get<std::string>());
      }
      w.metrics = names;
    }
    t.get("weak_modes", w.weak_modes);
    t.get("threads", w.threads);
    if (const json* l = t.find("limit")) {
      Table lt(*l, "sweep.limit");
      lt.get("dt_max", w.limit.dt_max);
      lt.get("cfl_number", w.limit.cfl_number);
      lt.finish();
    }
    t.finish();
    c.sweep = w;
    if (!initial) {
      // sweeps default to the standard sweep data
      c.initial.velocity = "default";
      c.initial.density = "default";
      c.initial.reference = w.kind == SweepKind::dens ? ReferenceDensity::zonal : ReferenceDensity::constant;
    }
  }
  top.finish();

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.sweep) {
    c.sweep->base = s;
    c.sweep->seed = s.seed;
    try {
      c.sweep->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (c.sweep->kind == SweepKind::dens && c.initial.reference != ReferenceDensity::zonal)
      throw ConfigError("initial.reference: a dens sweep needs the zonal reference density");
  }
  return c;
}

ParsedConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ParsedConfig& c) {
  const SimConfig& s = c.sim;
  json j = {
      {"epsilon", s.epsilon},
      {"nu", s.nu},
      {"n", s.n},
      {"t_end", s.t_end},
      {"density_floor", s.density_floor},
      {"dealias", s.dealias},
      {"hyperdiffusion", s.hyperdiffusion},
      {"snapshot_interval", s.snapshot_interval},
      {"seed", s.seed},
      {"time_step",
       {{"cfl_number", s.dt_policy.cfl_number},
        {"coriolis_fraction", s.dt_policy.coriolis_fraction},
        {"dt_max", s.dt_policy.dt_max}}},
      {"elliptic", {{"tol", s.elliptic_tol}, {"max_iter", s.elliptic_max_iter}}},
      {"initial",
       {{"reference", reference_name(c.initial.reference)},
        {"velocity", c.initial.velocity},
        {"density", c.initial.density},
        {"kmax", c.initial.kmax},
        {"velocity_amplitude", c.initial.velocity_amplitude},
        {"density_amplitude", c.initial.density_amplitude}}},
      {"output", {{"snapshots", c.write_snapshots}}},
  };
  if (c.sweep) {
    const SweepConfig& w = *c.sweep;
    json sw = {{"kind", w.kind == SweepKind::hom ? "hom" : "dens"},
               {"epsilons", w.epsilons},
               {"weak_modes", w.weak_modes},
               {"threads", w.threads},
               {"limit", {{"dt_max", w.limit.dt_max}, {"cfl_number", w.limit.cfl_number}}}};
    if (w.metrics) sw["metrics"] = *w.metrics;
    j["sweep"] = sw;
  }
  return j;
}

InitialData build_initial_data(const InitialSpec& spec, GridPtr grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VectorField u = VectorField::zeros(grid);
  if (spec.velocity == "shear") {
    u.x = ScalarField::from_function(grid, [](double, double y) { return std::sin(y); });
  } else if (spec.velocity == "default") {
    u.x = ScalarField::from_function(grid, [](double x, double y) { return std::sin(y) * std::cos(x) + std::sin(y); });
  } else if (spec.velocity == "random") {
    u.x = random_field(grid, rng, spec.kmax);
    u.y = random_field(grid, rng, spec.kmax);
  }
  u *= spec.velocity_amplitude;
  ScalarField r = ScalarField::zeros(grid);
  if (spec.density == "default")
    r = ScalarField::from_function(grid, [](double x, double y) { return std::cos(x) + std::sin(y); });
  else if (spec.density == "random")
    r = random_field(grid, rng, spec.kmax);
  r *= spec.density_amplitude;
  return InitialData::make(grid, spec.reference, r, u);
}

// ---- CSV ----------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& cell) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw IoError("not a number: '" + cell + "'");
  }
  if (used != cell.size()) throw IoError("not a number: '" + cell + "'");
  return v;
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << quote(row[i]);
  os << '\n';
}

// Splits one record; quoted cells may contain commas and doubled quotes.
std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  write_row(os, table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw std::logic_error("CSV row width differs from header in " + path.string());
    write_row(os, r);
  }
  if (!os) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      t.header = split_row(line);
      first = false;
      continue;
    }
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != t.header.size()) throw IoError("ragged row in " + path.string());
    t.rows.push_back(std::move(cells));
  }
  if (first) throw IoError("missing header in " + path.string());
  return t;
}

CsvTable ledger_table(const EnergyLedger& ledger) {
  CsvTable t;
  t.header = {"t",       "dt",      "kinetic",      "dissipation",   "mass",
              "rho_min", "rho_max", "div_residual", "coriolis_work", "elliptic_iterations"};
  for (const auto& r : ledger.records)
    t.rows.push_back({format_double(r.t), format_double(r.dt), format_double(r.kinetic), format_double(r.dissipation),
                      format_double(r.mass), format_double(r.rho_min), format_double(r.rho_max),
                      format_double(r.div_residual), format_double(r.coriolis_work),
                      std::to_string(r.elliptic_iterations)});
  return t;
}

CsvTable lp_property_table(const std::vector<lp::PropertyRow>& rows) {
  CsvTable t;
  t.header = {"property", "n", "parameter", "measured", "bound", "pass"};
  for (const auto& r : rows)
    t.rows.push_back({r.property, std::to_string(r.n), r.parameter, format_double(r.measured),
                      format_double(r.bound), r.pass ? "pass" : "fail"});
  return t;
}

CsvTable metrics_table(const ConvergenceReport& report) {
  CsvTable t;
  t.header = {"metric", "epsilon", "value"};
  for (const auto& m : report.metrics)
    for (std::size_t i = 0; i < m.values.size(); ++i)
      t.rows.push_back({m.name, format_double(report.epsilons[i]), format_double(m.values[i])});
  return t;
}

CsvTable rates_table(const ConvergenceReport& report) {
  CsvTable t;
  t.header = {"metric", "slope", "residual", "pass", "expectation"};
  for (const auto& m : report.metrics)
    t.rows.push_back({m.name, m.fit.ok ? format_double(m.fit.slope) : "nan",
                      m.fit.ok ? format_double(m.fit.residual) : "nan", m.pass ? "pass" : "fail", m.expectation});
  return t;
}

// ---- field snapshots ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'S', 'C', 'F', 'I', 'E', 'L', 'D'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const fs::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated field file " + path.string());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is, const fs::path& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated field file " + path.string());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_field(const fs::path& path, const ScalarField& f, double t, double epsilon, double nu) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(f.grid().n()));
  put_u32(os, f.is_spectral() ? 1u : 0u);
  put_f64(os, t);
  put_f64(os, epsilon);
  put_f64(os, nu);
  if (f.is_spectral()) {
    for (const cplx& c : f.coeffs()) {
      put_f64(os, c.real());
      put_f64(os, c.imag());
    }
  } else {
    for (double v : f.values()) put_f64(os, v);
  }
  if (!os) throw IoError("write failed for " + path.string());
}

FieldFile read_field(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw IoError("not a field file: " + path.string());
  const std::uint32_t n = get_u32(is, path);
  const std::uint32_t rep = get_u32(is, path);
  if (n < 16 || (n & (n - 1)) != 0 || rep > 1) throw IoError("corrupt header in " + path.string());
  FieldFile out;
  out.t = get_f64(is, path);
  out.epsilon = get_f64(is, path);
  out.nu = get_f64(is, path);
  const auto grid = make_grid(static_cast<int>(n));
  out.field = ScalarField(grid, rep == 1 ? Representation::spectral : Representation::physical);
  if (rep == 1) {
    for (cplx& c : out.field.coeffs()) {
      const double re = get_f64(is, path);
      const double im = get_f64(is, path);
      c = cplx(re, im);
    }
  } else {
    for (double& v : out.field.values()) v = get_f64(is, path);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in " + path.string());
  return out;
}

std::vector<fs::path> write_snapshot(const fs::path& dir, const std::string& stem, const Snapshot& s, double epsilon,
                                     double nu) {
  std::vector<fs::path> paths = {dir / (stem + "_rho.bin"), dir / (stem + "_u1.bin"), dir / (stem + "_u2.bin")};
  write_field(paths[0], s.rho.to_spectral(), s.t, epsilon, nu);
  write_field(paths[1], s.u.x.to_spectral(), s.t, epsilon, nu);
  write_field(paths[2], s.u.y.to_spectral(), s.t, epsilon, nu);
  return paths;
}

Snapshot read_snapshot(const fs::path& dir, const std::string& stem) {
  auto rho = read_field(dir / (stem + "_rho.bin"));
  auto u1 = read_field(dir / (stem + "_u1.bin"));
  auto u2 = read_field(dir / (stem + "_u2.bin"));
  if (rho.t != u1.t || rho.t != u2.t) throw IoError("snapshot " + stem + " mixes times");
  return {rho.t, rho.field, {u1.field, u2.field}};
}

// ---- manifest -----------------------------------------------------------------

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string version_string() { return NSC_VERSION; }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  json files = json::array();
  for (const auto& f : m.files) {
    const fs::path full = dir / f;
    std::error_code ec;
    const auto size = fs::file_size(full, ec);
    if (ec) throw IoError("cannot stat " + full.string());
    files.push_back({{"path", f.generic_string()}, {"sha256", sha256_file(full)}, {"bytes", size}});
  }
  json j = {{"code_version", version_string()},
            {"seed", m.seed},
            {"rng", "std::mt19937_64"},
            {"config", m.config},
            {"start_time", m.start_time},
            {"end_time", m.end_time},
            {"files", files}};
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream os(dir / "manifest.json");
  if (!os) throw IoError("cannot write " + (dir / "manifest.json").string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed for " + (dir / "manifest.json").string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace nsc::io
