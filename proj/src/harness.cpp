#include "nsc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "nsc/operators.hpp"

namespace nsc {

namespace {

template <class F>
void check_matching(const Series<F>& a, const Series<F>& b) {
  if (a.t.size() != b.t.size() || a.f.size() != a.t.size() || b.f.size() != b.t.size())
    throw std::invalid_argument("series have different sample counts");
  for (std::size_t k = 0; k < a.t.size(); ++k)
    if (std::abs(a.t[k] - b.t[k]) > 1e-9 * std::max(1.0, std::abs(a.t[k])))
      throw std::invalid_argument("series sampled at different times");
  if (!a.f.empty() && a.f.front().grid().n() != b.f.front().grid().n())
    throw std::invalid_argument("series on different grids");
}

// Trapezoid weights for the sample times.
std::vector<double> trapezoid(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double h = t[k] - t[k - 1];
    w[k - 1] += 0.5 * h;
    w[k] += 0.5 * h;
  }
  return w;
}

template <class F>
double strong(const Series<F>& a, const Series<F>& b) {
  check_matching(a, b);
  const auto w = trapezoid(a.t);
  double s = 0.0;
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    const double d = l2_norm((a.f[k] - b.f[k]).to_physical());
    s += w[k] * d * d;
  }
  return std::sqrt(s);
}

// int w(t) f(t) dt / int w(t) dt
VectorField window_average(const VectorSeries& u, const TimeWindow& win) {
  const auto q = trapezoid(u.t);
  auto acc = VectorField::zeros(u.f.front().grid_ptr(), Representation::spectral);
  double mass = 0.0;
  for (std::size_t k = 0; k < u.t.size(); ++k) {
    const double c = q[k] * win.value(u.t[k]);
    if (c == 0.0) continue;
    acc += c * u.f[k].to_spectral();
    mass += c;
  }
  if (mass <= 0.0) throw std::invalid_argument("time window does not overlap the samples");
  return acc * (1.0 / mass);
}

double series_end(const std::vector<double>& t) {
  if (t.size() < 2) throw std::invalid_argument("series needs at least two samples");
  return t.back();
}

}  // namespace

VectorSeries velocity_series(const Trajectory& traj) {
  VectorSeries s;
  for (const auto& snap : traj.snapshots) {
    s.t.push_back(snap.t);
    s.f.push_back(snap.u.to_spectral());
  }
  return s;
}

VectorSeries velocity_series(const std::vector<HomLimitState>& traj) {
  VectorSeries s;
  for (const auto& st : traj) {
    s.t.push_back(st.t);
    s.f.push_back(st.u.to_spectral());
  }
  return s;
}

ScalarSeries sigma_series(const Trajectory& traj, const ScalarField& rho0, double epsilon) {
  ScalarSeries s;
  const auto r0 = rho0.to_spectral();
  for (const auto& snap : traj.snapshots) {
    s.t.push_back(snap.t);
    s.f.push_back((snap.rho.to_spectral() - r0) * (1.0 / epsilon));
  }
  return s;
}

ScalarSeries s_series(const Trajectory& traj, const ScalarField& rho0) { return sigma_series(traj, rho0, 1.0); }

ScalarSeries r_series(const std::vector<HomLimitState>& traj) {
  ScalarSeries s;
  for (const auto& st : traj) {
    s.t.push_back(st.t);
    s.f.push_back(st.r.to_spectral());
  }
  return s;
}

double metric_strong(const VectorSeries& a, const VectorSeries& b) { return strong(a, b); }
double metric_strong(const ScalarSeries& a, const ScalarSeries& b) { return strong(a, b); }

double metric_weak(const VectorSeries& a, const VectorSeries& b, int K, const std::vector<TimeWindow>& windows) {
  check_matching(a, b);
  if (a.t.empty()) return 0.0;
  const auto q = trapezoid(a.t);
  const Grid& g = a.f.front().grid();
  std::vector<VectorField> d;
  d.reserve(a.t.size());
  for (std::size_t k = 0; k < a.t.size(); ++k) d.push_back((a.f[k] - b.f[k]).to_spectral());
  double worst = 0.0;
  for (const auto& win : windows) {
    std::vector<double> wq(a.t.size());
    for (std::size_t k = 0; k < a.t.size(); ++k) wq[k] = q[k] * win.value(a.t[k]);
    for (int row = 0; row < g.n(); ++row)
      for (int col = 0; col < g.nc(); ++col) {
        if (g.ksq(row, col) > static_cast<double>(K) * K) continue;
        cplx sx = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k) {
          sx += wq[k] * d[k].x.at_spec(row, col);
          sy += wq[k] * d[k].y.at_spec(row, col);
        }
        worst = std::max({worst, std::abs(sx), std::abs(sy)});
      }
  }
  return worst;
}

double metric_constraint(const VectorSeries& u, const ScalarField& rho0, const std::vector<TimeWindow>& windows) {
  series_end(u.t);
  const auto grad = gradient(rho0.to_spectral()).to_physical();
  double worst = 0.0;
  for (const auto& win : windows) {
    const auto ub = window_average(u, win).to_physical();
    worst = std::max(worst, sobolev_norm(multiply(ub.x, grad.x) + multiply(ub.y, grad.y), -1.0));
  }
  return worst;
}

double nonzonal_fraction(const VectorSeries& u, const ScalarField& rho0, const std::vector<TimeWindow>& windows) {
  series_end(u.t);
  double worst = 0.0;
  for (const auto& win : windows) {
    const auto ub = window_average(u, win);
    const double total = l2_norm(ub);
    if (total == 0.0) continue;
    const double rest = l2_norm(ub - zonal_project(ub, rho0));
    worst = std::max(worst, rest * rest / (total * total));
  }
  return worst;
}

double metric_sigma_bound(const ScalarSeries& sigma) {
  double worst = 0.0;
  for (const auto& f : sigma.f) worst = std::max(worst, sobolev_norm(f, -2.5));
  return worst;
}

double metric_s_decay(const ScalarSeries& s, double epsilon, double theta, double k) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  double worst = 0.0;
  for (const auto& f : s.f) worst = std::max(worst, sobolev_norm(f, -k));
  return worst / std::pow(epsilon, theta);
}

FitResult fit_rate(const std::vector<double>& eps, const std::vector<double>& values) {
  FitResult r;
  if (eps.size() != values.size()) {
    r.reason = "epsilon and value counts differ";
    return r;
  }
  if (eps.size() < 3) {
    r.reason = "fewer than 3 points";
    return r;
  }
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(values[i] > 0.0) || !(eps[i] > 0.0) || !std::isfinite(values[i])) {
      r.reason = "non-positive value";
      return r;
    }
  const double m = static_cast<double>(eps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  if (den <= 0.0) {
    r.reason = "all epsilons equal";
    return r;
  }
  r.slope = (m * sxy - sx * sy) / den;
  r.intercept = (sy - r.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double e = std::log(values[i]) - (r.intercept + r.slope * std::log(eps[i]));
    ss += e * e;
  }
  r.residual = std::sqrt(ss / m);
  r.ok = true;
  return r;
}

InitialData default_sweep_data(GridPtr grid, SweepKind kind) {
  const auto r0 = ScalarField::from_function(grid, [](double x, double y) { return std::cos(x) + std::sin(y); });
  const VectorField u0{
      ScalarField::from_function(grid, [](double x, double y) { return std::sin(y) * std::cos(x) + std::sin(y); }),
      ScalarField::zeros(grid)};
  const auto ref = kind == SweepKind::hom ? ReferenceDensity::constant : ReferenceDensity::zonal;
  return InitialData::make(grid, ref, r0, u0);
}

std::vector<std::string> metric_names(SweepKind kind) {
  if (kind == SweepKind::hom) return {"strong_u", "strong_r", "weak_u"};
  return {"constraint", "nonzonal_fraction", "zonal_residual", "sigma_bound", "s_decay"};
}

void SweepConfig::validate() const {
  if (epsilons.empty()) throw std::invalid_argument("sweep.epsilons must not be empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0 && epsilons[i] <= 1.0))
      throw std::invalid_argument("sweep.epsilons: every value must lie in (0, 1]");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw std::invalid_argument("sweep.epsilons must be strictly decreasing");
  }
  base.validate();
  if (threads < 1) throw std::invalid_argument("sweep.threads must be at least 1");
  if (weak_modes < 0) throw std::invalid_argument("sweep.weak_modes must be nonnegative");
  if (!(limit.dt_max > 0.0)) throw std::invalid_argument("limit.dt_max must be positive");
  const auto known = metric_names(kind);
  if (metrics)
    for (const auto& m : *metrics)
      if (std::find(known.begin(), known.end(), m) == known.end())
        throw std::invalid_argument("sweep.metrics: unknown metric '" + m + "' for this sweep kind");
}

double SweepConfig::shared_dt() const {
  return std::min(base.dt_policy.dt_max, base.dt_policy.coriolis_fraction * epsilons.back());
}

const MetricSeries* ConvergenceReport::find(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return &m;
  return nullptr;
}

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] < values[i - 1])) return false;
  return !values.empty();
}

ConvergenceReport run_sweep(const SweepConfig& cfg, const InitialData& init, std::vector<SweepRun>* runs_out) {
  cfg.validate();
  ConvergenceReport rep;
  rep.epsilons = cfg.epsilons;
  const double dt = cfg.shared_dt();
  const auto wanted = cfg.metrics ? *cfg.metrics : metric_names(cfg.kind);

  // solver runs, one at a time per worker so that a failure leaves the others intact
  std::vector<std::optional<SweepRun>> runs(cfg.epsilons.size());
  std::vector<std::string> errors(cfg.epsilons.size());
  std::vector<double> wall(cfg.epsilons.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        SimConfig c = cfg.base;
        c.epsilon = cfg.epsilons[i];
        c.dt_policy.dt_max = dt;
        c.seed = cfg.seed;
        runs[i] = SweepRun{c.epsilon, run(c, init)};
      } catch (const std::exception& e) {
        errors[i] = "epsilon = " + std::to_string(cfg.epsilons[i]) + ": " + e.what();
      }
      wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(runs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i]) continue;
    const auto& res = runs[i]->result;
    RunSummary s;
    s.epsilon = runs[i]->epsilon;
    s.steps = res.ledger.records.size() - 1;
    s.final_time = res.final_state.t;
    s.energy_excess = res.ledger.max_relative_excess();
    s.mass_drift = res.ledger.max_mass_drift();
    s.wall_seconds = wall[i];
    rep.runs.push_back(s);
  }
  for (const auto& e : errors)
    if (!e.empty()) {
      rep.partial = true;
      rep.error += (rep.error.empty() ? "" : "; ") + e;
    }
  auto hand_back = [&] {
    if (runs_out)
      for (auto& r : runs)
        if (r) runs_out->push_back(std::move(*r));
  };
  if (rep.partial || wanted.empty()) {
    hand_back();
    return rep;
  }

  const ScalarField& rho0 = init.rho_ref;
  const auto windows = standard_windows(cfg.base.t_end);
  auto add = [&](const std::string& name, std::vector<double> values, const std::string& expectation) {
    MetricSeries m;
    m.name = name;
    m.values = std::move(values);
    m.fit = fit_rate(cfg.epsilons, m.values);
    m.expectation = expectation;
    rep.metrics.push_back(std::move(m));
  };
  auto want = [&](const char* name) { return std::find(wanted.begin(), wanted.end(), name) != wanted.end(); };

  if (cfg.kind == SweepKind::hom) {
    HomLimitConfig lc = cfg.limit;
    lc.nu = cfg.base.nu;
    lc.t_end = cfg.base.t_end;
    lc.snapshot_interval = cfg.base.snapshot_interval;
    lc.dt_max = std::min(lc.dt_max, dt);
    lc.dealias = cfg.base.dealias;
    HomLimitRun lim;
    try {
      lim = run_hom_limit(make_hom_state(init.r0, init.u0), lc);
    } catch (const std::exception& e) {
      rep.partial = true;
      rep.error = std::string("limit run: ") + e.what();
      hand_back();
      return rep;
    }
    const auto ul = velocity_series(lim.snapshots);
    const auto rl = r_series(lim.snapshots);
    std::vector<double> su, sr, wu;
    for (const auto& r : runs) {
      const auto& traj = r->result.trajectory;
      const auto ue = velocity_series(traj);
      if (want("strong_u")) su.push_back(metric_strong(ue, ul));
      if (want("strong_r")) sr.push_back(metric_strong(sigma_series(traj, rho0, r->epsilon), rl));
      if (want("weak_u")) wu.push_back(metric_weak(ue, ul, cfg.weak_modes, windows));
    }
    if (want("strong_u")) add("strong_u", su, "strictly decreasing, slope >= 0.8");
    if (want("strong_r")) add("strong_r", sr, "strictly decreasing");
    if (want("weak_u")) add("weak_u", wu, "strictly decreasing");
  } else {
    std::vector<double> con, nzf, zres, sig, sd;
    for (const auto& r : runs) {
      const auto& traj = r->result.trajectory;
      const auto ue = velocity_series(traj);
      if (want("constraint")) con.push_back(metric_constraint(ue, rho0, windows));
      if (want("nonzonal_fraction")) nzf.push_back(nonzonal_fraction(ue, rho0, {TimeWindow{0.0, cfg.base.t_end}}));
      if (want("zonal_residual")) {
        const auto z = zonal_limit_residual(traj, rho0, r->epsilon, cfg.base.nu, windows);
        zres.push_back(*std::max_element(z.begin(), z.end()));
      }
      if (want("sigma_bound")) sig.push_back(metric_sigma_bound(sigma_series(traj, rho0, r->epsilon)));
      if (want("s_decay")) sd.push_back(metric_s_decay(s_series(traj, rho0), r->epsilon, 0.0));
    }
    if (want("constraint")) add("constraint", con, "strictly decreasing");
    if (want("nonzonal_fraction")) add("nonzonal_fraction", nzf, "strictly decreasing");
    if (want("zonal_residual")) add("zonal_residual", zres, "strictly decreasing");
    if (want("sigma_bound")) add("sigma_bound", sig, "max/min <= 10");
    if (want("s_decay")) add("s_decay", sd, "fitted exponent > 0");
  }

  for (auto& m : rep.metrics) {
    if (m.name == "strong_u")
      m.pass = strictly_decreasing(m.values) && m.fit.ok && m.fit.slope >= 0.8;
    else if (m.name == "sigma_bound") {
      const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
      m.pass = *lo > 0.0 && *hi / *lo <= 10.0;
    } else if (m.name == "s_decay")
      m.pass = m.fit.ok && m.fit.slope > 0.0;
    else
      m.pass = strictly_decreasing(m.values);
  }
  hand_back();
  return rep;
}

}  // namespace nsc
