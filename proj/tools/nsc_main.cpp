#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "nsc/harness.hpp"
#include "nsc/io.hpp"
#include "nsc/limit.hpp"
#include "nsc/littlewood_paley.hpp"

using namespace nsc;
namespace io = nsc::io;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 1, runtime_error = 2, io_error = 3 };

// Failure of the computation itself, not of its inputs.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NSC_OUTPUT_DIR"); env && *env) return env;
  return "nsc_out";
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw io::IoError("cannot create directory " + p.string() + ": " + ec.message());
}

std::string snapshot_stem(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%05zu", k);
  return buf;
}

// ledger.csv, snapshots/ and manifest.json for one solver run.
void write_run_dir(const fs::path& dir, const io::ParsedConfig& pc, const RunResult& res, const std::string& start) {
  make_dirs(dir);
  io::Manifest m;
  m.config = io::to_json(pc);
  m.seed = pc.sim.seed;
  m.start_time = start;
  io::write_csv(dir / "ledger.csv", io::ledger_table(res.ledger));
  m.files.push_back("ledger.csv");
  json snaps = json::array();
  if (pc.write_snapshots) {
    make_dirs(dir / "snapshots");
    const auto& s = res.trajectory.snapshots;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::string stem = snapshot_stem(k);
      for (const auto& p : io::write_snapshot(dir / "snapshots", stem, s[k], pc.sim.epsilon, pc.sim.nu))
        m.files.push_back(fs::path("snapshots") / p.filename());
      snaps.push_back({{"stem", stem}, {"t", s[k].t}});
    }
  }
  m.extra["snapshots"] = snaps;
  m.extra["steps"] = res.ledger.records.empty() ? 0 : res.ledger.records.size() - 1;
  m.extra["energy_excess"] = res.ledger.max_relative_excess();
  m.extra["mass_drift"] = res.ledger.max_mass_drift();
  m.end_time = io::utc_now();
  io::write_manifest(dir, m);
}

int cmd_run(const std::string& config, const std::string& out) {
  const auto pc = io::parse_config(config);
  const auto dir = output_dir(out);
  const std::string start = io::utc_now();
  const auto init = io::build_initial_data(pc.initial, make_grid(pc.sim.n), pc.sim.seed);
  const auto res = run(pc.sim, init);
  write_run_dir(dir, pc, res, start);
  std::cout << "run: " << res.ledger.records.size() - 1 << " steps to t = " << res.final_state.t << ", output in "
            << dir.string() << "\n";
  return ok;
}

std::string eps_dir(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "eps_%.6g", eps);
  return buf;
}

int cmd_sweep(const std::string& config, const std::string& out) {
  auto pc = io::parse_config(config);
  if (!pc.sweep) throw io::ConfigError("sweep: table missing from " + config);
  auto sc = *pc.sweep;
  if (const char* env = std::getenv("NSC_THREADS"); env && *env) {
    try {
      sc.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw io::ConfigError(std::string("NSC_THREADS: not an integer: ") + env);
    }
    if (sc.threads < 1) throw io::ConfigError("NSC_THREADS: must be at least 1");
  }
  const auto dir = output_dir(out);
  make_dirs(dir);
  const std::string start = io::utc_now();
  const auto init = io::build_initial_data(pc.initial, make_grid(sc.base.n), sc.seed);
  std::vector<SweepRun> runs;
  const auto rep = run_sweep(sc, init, &runs);

  io::Manifest top;
  top.config = io::to_json(pc);
  top.seed = sc.seed;
  top.start_time = start;
  for (const auto& r : runs) {
    auto per = pc;
    per.sim.epsilon = r.epsilon;
    per.sim.dt_policy.dt_max = sc.shared_dt();
    per.sweep.reset();
    write_run_dir(dir / eps_dir(r.epsilon), per, r.result, start);
    top.files.push_back(fs::path(eps_dir(r.epsilon)) / "manifest.json");
  }
  io::write_csv(dir / "metrics.csv", io::metrics_table(rep));
  io::write_csv(dir / "rates.csv", io::rates_table(rep));
  top.files.push_back("metrics.csv");
  top.files.push_back("rates.csv");
  top.extra["partial"] = rep.partial;
  if (rep.partial) top.extra["error"] = rep.error;
  top.end_time = io::utc_now();
  io::write_manifest(dir, top);

  for (const auto& m : rep.metrics) {
    std::cout << m.name << ": " << (m.pass ? "pass" : "fail");
    if (m.fit.ok) std::cout << ", slope " << m.fit.slope;
    std::cout << "\n";
  }
  if (rep.partial) {
    std::cerr << "sweep aborted: " << rep.error << "\n";
    return runtime_error;
  }
  return ok;
}

int cmd_lp_test(const std::vector<int>& sizes, unsigned long long seed, const std::string& out) {
  for (int n : sizes)
    if (n < 16 || (n & (n - 1)) != 0) throw io::ConfigError("sizes: " + std::to_string(n) + " is not a power of two >= 16");
  const auto rows = lp::run_property_suite(sizes, seed);
  const auto dir = output_dir(out);
  make_dirs(dir);
  io::write_csv(dir / "lp_properties.csv", io::lp_property_table(rows));
  int failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      std::cerr << "fail: " << r.property << " n=" << r.n << " " << r.parameter << " measured " << r.measured
                << " bound " << r.bound << "\n";
    }
  std::cout << rows.size() - failed << "/" << rows.size() << " properties hold\n";
  return failed ? runtime_error : ok;
}

// Optional limit-run settings: {"dt_max": .., "cfl_number": ..}.
HomLimitConfig parse_limit_config(const std::string& path, const SimConfig& sim) {
  HomLimitConfig lc;
  lc.nu = sim.nu;
  lc.t_end = sim.t_end;
  lc.snapshot_interval = sim.snapshot_interval;
  lc.dealias = sim.dealias;
  lc.dt_max = std::min(lc.dt_max, sim.dt_policy.dt_max);
  if (path.empty()) return lc;
  const json j = io::read_json(path);
  if (!j.is_object()) throw io::ConfigError("limit config: expected a table");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "dt_max" && it.key() != "cfl_number") throw io::ConfigError(it.key() + ": unknown key");
    if (!it->is_number()) throw io::ConfigError(it.key() + ": expected a number");
  }
  lc.dt_max = j.value("dt_max", lc.dt_max);
  lc.cfl_number = j.value("cfl_number", lc.cfl_number);
  if (!(lc.dt_max > 0.0)) throw io::ConfigError("dt_max: must be positive");
  if (!(lc.cfl_number > 0.0 && lc.cfl_number <= 1.0)) throw io::ConfigError("cfl_number: must lie in (0, 1]");
  return lc;
}

int cmd_limit_compare(const std::string& manifest, const std::string& limit_config, const std::string& out) {
  const fs::path mpath(manifest);
  const json m = io::read_json(mpath);
  if (!m.contains("config") || !m.contains("snapshots")) throw io::ConfigError("manifest: not a run manifest");
  const auto pc = io::parse_config_text(m["config"].dump());
  const auto& snaps = m["snapshots"];
  if (snaps.size() < 2) throw RuntimeFailure("limit-compare needs at least two snapshots; rerun with output.snapshots");
  const fs::path run_dir = mpath.parent_path();
  Trajectory traj;
  for (const auto& s : snaps) traj.snapshots.push_back(io::read_snapshot(run_dir / "snapshots", s.at("stem")));
  const double T = traj.snapshots.back().t;
  const auto dir = output_dir(out);
  make_dirs(dir);
  const std::string start = io::utc_now();
  const auto init = io::build_initial_data(pc.initial, make_grid(pc.sim.n), pc.sim.seed);
  const auto windows = standard_windows(T);

  io::CsvTable table;
  std::string name;
  if (pc.initial.reference == ReferenceDensity::zonal) {
    name = "zonal_residual.csv";
    table.header = {"window_start", "window_end", "residual"};
    const auto res = zonal_limit_residual(traj, init.rho_ref, pc.sim.epsilon, pc.sim.nu, windows);
    for (std::size_t i = 0; i < windows.size(); ++i)
      table.rows.push_back({io::format_double(windows[i].a), io::format_double(windows[i].b), io::format_double(res[i])});
    const auto u = velocity_series(traj);
    const std::vector<TimeWindow> whole{{0.0, T}};
    std::cout << "constraint " << metric_constraint(u, init.rho_ref, windows) << ", nonzonal_fraction "
              << nonzonal_fraction(u, init.rho_ref, whole) << "\n";
  } else {
    name = "hom_limit_diff.csv";
    auto lc = parse_limit_config(limit_config, pc.sim);
    lc.t_end = T;
    const auto limit = run_hom_limit(make_hom_state(init.r0, init.u0), lc);
    if (limit.snapshots.size() != traj.snapshots.size())
      throw RuntimeFailure("limit run and solver run disagree on snapshot times");
    table.header = {"metric", "value"};
    const auto u = velocity_series(traj), ul = velocity_series(limit.snapshots);
    const double strong_u = metric_strong(u, ul);
    const double strong_r =
        metric_strong(sigma_series(traj, init.rho_ref, pc.sim.epsilon), r_series(limit.snapshots));
    const double weak_u = metric_weak(u, ul, 8, windows);
    table.rows = {{"strong_u", io::format_double(strong_u)},
                  {"strong_r", io::format_double(strong_r)},
                  {"weak_u", io::format_double(weak_u)}};
    std::cout << "strong_u " << strong_u << ", strong_r " << strong_r << ", weak_u " << weak_u << "\n";
  }
  io::write_csv(dir / name, table);
  io::Manifest out_m;
  out_m.config = io::to_json(pc);
  out_m.seed = pc.sim.seed;
  out_m.start_time = start;
  out_m.files = {name};
  out_m.extra["source_manifest"] = fs::absolute(mpath).string();
  out_m.end_time = io::utc_now();
  io::write_manifest(dir, out_m);
  return ok;
}

int cmd_report(const std::string& metrics, const std::string& out) {
  const auto t = io::read_csv(metrics);
  if (t.header != std::vector<std::string>{"metric", "epsilon", "value"})
    throw io::IoError(metrics + ": expected columns metric,epsilon,value");
  if (t.rows.empty()) throw RuntimeFailure(metrics + ": no metric rows");
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  for (const auto& r : t.rows) {
    if (!series.count(r[0])) order.push_back(r[0]);
    series[r[0]].emplace_back(io::parse_double(r[1]), io::parse_double(r[2]));
  }
  const fs::path dir = out.empty() ? fs::path(metrics).parent_path() : fs::path(out);
  if (!dir.empty()) make_dirs(dir);
  for (const auto& name : order) {
    const fs::path p = dir / (name + ".dat");
    std::ofstream os(p);
    if (!os) throw io::IoError("cannot write " + p.string());
    os << "# epsilon " << name << "\n";
    for (const auto& [e, v] : series[name]) os << io::format_double(e) << " " << io::format_double(v) << "\n";
    if (!os) throw io::IoError("write failed for " + p.string());
    std::cout << p.string() << "\n";
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotating variable-density Navier-Stokes solver and limit harness"};
  app.require_subcommand(1);
  std::string config, out, manifest, limit_config, metrics;
  std::vector<int> sizes{64, 128};
  unsigned long long seed = 1;

  auto* run_cmd = app.add_subcommand("run", "single simulation: ledger, snapshots, manifest");
  run_cmd->add_option("--config", config, "JSON config")->required();
  run_cmd->add_option("--output", out, "output directory (default $NSC_OUTPUT_DIR or nsc_out)");

  auto* sweep_cmd = app.add_subcommand("sweep", "epsilon sweep with limit metrics");
  sweep_cmd->add_option("--config", config, "JSON config with a sweep table")->required();
  sweep_cmd->add_option("--output", out, "output directory");

  auto* lp_cmd = app.add_subcommand("lp-test", "Littlewood-Paley property suite");
  lp_cmd->add_option("--sizes", sizes, "grid sizes");
  lp_cmd->add_option("--seed", seed, "RNG seed");
  lp_cmd->add_option("--output", out, "output directory");

  auto* lc_cmd = app.add_subcommand("limit-compare", "compare a stored run with its limit system");
  lc_cmd->add_option("--manifest", manifest, "manifest.json of a run")->required();
  lc_cmd->add_option("--limit-config", limit_config, "JSON with dt_max and cfl_number for the limit run");
  lc_cmd->add_option("--output", out, "output directory");

  auto* rep_cmd = app.add_subcommand("report", "metrics.csv to one two-column .dat file per metric");
  rep_cmd->add_option("--metrics", metrics, "metrics.csv from a sweep")->required();
  rep_cmd->add_option("--output", out, "output directory (default: next to metrics.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run_cmd) return cmd_run(config, out);
    if (*sweep_cmd) return cmd_sweep(config, out);
    if (*lp_cmd) return cmd_lp_test(sizes, seed, out);
    if (*lc_cmd) return cmd_limit_compare(manifest, limit_config, out);
    if (*rep_cmd) return cmd_report(metrics, out);
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const io::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_error;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return runtime_error;
  }
  return ok;
}
