#include "nsc/limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nsc/operators.hpp"

namespace nsc {

namespace {

ScalarField maybe_dealias(const ScalarField& f, bool on) { return on ? dealias(f.to_spectral()) : f.to_spectral(); }

ScalarField heat(const ScalarField& f, double nu, double dt) {
  ScalarField s = f.to_spectral();
  const Grid& g = s.grid();
  for (int row = 0; row < g.n(); ++row)
    for (int col = 0; col < g.nc(); ++col) s.at_spec(row, col) *= std::exp(-nu * g.ksq(row, col) * dt);
  return s;
}

VectorField heat(const VectorField& v, double nu, double dt) { return {heat(v.x, nu, dt), heat(v.y, nu, dt)}; }

struct HomRhs {
  ScalarField r;
  VectorField u;
};

HomRhs hom_rhs(const ScalarField& r, const VectorField& u, bool dl) {
  const auto rp = r.to_physical();
  const auto up = u.to_physical();
  HomRhs out;
  out.r = -divergence(VectorField{maybe_dealias(multiply(rp, up.x), dl), maybe_dealias(multiply(rp, up.y), dl)});

  const auto gx = gradient(u.x).to_physical();
  const auto gy = gradient(u.y).to_physical();
  auto fx = ScalarField::zeros(u.grid_ptr()), fy = ScalarField::zeros(u.grid_ptr());
  auto ax = fx.values(), ay = fy.values();
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double u1 = up.x.values()[i], u2 = up.y.values()[i], ri = rp.values()[i];
    // u.grad u + r u^perp, u^perp = (-u2, u1)
    ax[i] = -(u1 * gx.x.values()[i] + u2 * gx.y.values()[i]) + ri * u2;
    ay[i] = -(u1 * gy.x.values()[i] + u2 * gy.y.values()[i]) - ri * u1;
  }
  VectorField f{maybe_dealias(fx, dl), maybe_dealias(fy, dl)};
  // the mean of r u^perp is not a gradient; dropping it keeps int u fixed
  f.x.at_spec(0, 0) = 0.0;
  f.y.at_spec(0, 0) = 0.0;
  out.u = leray_project(f);
  return out;
}

double grad_sq(const VectorField& u) {
  const double a = l2_norm(gradient(u.x)), b = l2_norm(gradient(u.y));
  return a * a + b * b;
}

double log_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.5 * (a + b);
  if (std::abs(b / a - 1.0) < 1e-6) return 0.5 * (a + b) - (a - b) * (a - b) / (12.0 * (a + b));
  return (a - b) / std::log(a / b);
}

double coupling_work(const ScalarField& r, const VectorField& u) {
  const auto rp = r.to_physical();
  const auto up = u.to_physical();
  const auto pp = perp(up);
  return std::abs(inner(multiply(rp, pp.x), up.x) + inner(multiply(rp, pp.y), up.y));
}

double h1_sq(const VectorField& u) {
  const double a = sobolev_norm(u, 1.0);
  return a * a;
}

}  // namespace

HomLimitState make_hom_state(const ScalarField& r0, const VectorField& u0) {
  return {r0.to_spectral(), leray_project(u0.to_spectral()), 0.0};
}

HomLimitState hom_limit_step(const HomLimitState& s, double nu, double dt, bool dl) {
  const double h = s.r.grid().h();
  const double umax0 = max_abs(s.u.to_physical());
  if (umax0 * dt / h > 1.0) throw CflError("CFL number " + std::to_string(umax0 * dt / h) + " exceeds 1");

  const HomRhs n0 = hom_rhs(s.r, s.u, dl);
  const ScalarField r1 = s.r.to_spectral() + dt * n0.r;
  const VectorField u1 = heat(s.u + dt * n0.u, nu, dt);
  const HomRhs n1 = hom_rhs(r1, u1, dl);

  HomLimitState out;
  out.t = s.t + dt;
  out.r = 0.5 * (s.r.to_spectral() + r1 + dt * n1.r);
  out.u = leray_project(0.5 * (heat(s.u, nu, dt) + u1 + dt * n1.u));

  const double umax1 = max_abs(out.u.to_physical());
  if (umax1 * dt / h > 1.0) throw CflError("CFL number " + std::to_string(umax1 * dt / h) + " exceeds 1 after step");
  return out;
}

HomLimitRun run_hom_limit(const HomLimitState& init, const HomLimitConfig& cfg) {
  if (!(cfg.nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  if (!(cfg.dt_max > 0.0)) throw std::invalid_argument("time_step.dt_max must be positive");
  if (!(cfg.cfl_number > 0.0 && cfg.cfl_number <= 1.0))
    throw std::invalid_argument("time_step.cfl_number must lie in (0, 1]");
  if (cfg.snapshot_interval < 0.0) throw std::invalid_argument("output.snapshot_interval must be nonnegative");

  HomLimitRun res;
  HomLimitState s{init.r.to_spectral(), init.u.to_spectral(), 0.0};
  const double h = s.r.grid().h();
  double dissipation = 0.0;
  double gsq = grad_sq(s.u);

  auto record = [&](const HomLimitState& st) {
    HomStepRecord r;
    r.t = st.t;
    const double ul = l2_norm(st.u);
    r.kinetic = ul * ul;
    r.grad_sq = gsq;
    r.dissipation = dissipation;
    const auto rp = st.r.to_physical();
    r.r_l2 = l2_norm(rp);
    r.r_inf = max_abs(rp);
    r.coupling_work = coupling_work(st.r, st.u);
    r.div_u = l2_norm(divergence(st.u));
    res.ledger.push_back(r);
  };
  record(s);
  res.snapshots.push_back(s);

  const double T = cfg.t_end, every = cfg.snapshot_interval;
  const double tiny = 1e-12 * std::max(1.0, T);
  long next_index = 1;
  while (s.t < T - tiny) {
    double dt = cfg.dt_max;
    const double umax = max_abs(s.u.to_physical());
    if (umax > 0.0) dt = std::min(dt, cfg.cfl_number * h / umax);
    double target = T;
    if (every > 0.0) target = std::min(T, every * static_cast<double>(next_index));
    bool hit = false;
    if (s.t + dt >= target - tiny) {
      dt = target - s.t;
      hit = true;
    } else if (s.t + 2.0 * dt > target) {
      dt = 0.5 * (target - s.t);
    }
    HomLimitState next = hom_limit_step(s, cfg.nu, dt, cfg.dealias);
    if (hit) next.t = target;
    const double g1 = grad_sq(next.u);
    dissipation += 2.0 * cfg.nu * dt * log_mean(gsq, g1);
    gsq = g1;
    s = std::move(next);
    record(s);
    if (hit && every > 0.0 && target < T - tiny) {
      res.snapshots.push_back(s);
      ++next_index;
    }
  }
  if (res.snapshots.back().t < s.t) res.snapshots.push_back(s);
  res.final_state = s;
  return res;
}

double hom_limit_vorticity_residual(const std::vector<HomLimitState>& traj, double nu) {
  auto transport = [nu](const HomLimitState& s) {
    const auto om = curl(s.u.to_spectral());
    const auto up = s.u.to_physical();
    const auto g = gradient(om).to_physical();
    return (multiply(up.x, g.x) + multiply(up.y, g.y)).to_spectral() - nu * laplacian(om);
  };
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const auto& s1 = traj[k - 1];
    const auto& s2 = traj[k];
    const double dt = s2.t - s1.t;
    if (dt <= 0.0) continue;
    const auto q1 = curl(s1.u.to_spectral()) - s1.r.to_spectral();
    const auto q2 = curl(s2.u.to_spectral()) - s2.r.to_spectral();
    const auto res = (q2 - q1) * (1.0 / dt) + 0.5 * (transport(s1) + transport(s2));
    worst = std::max(worst, sobolev_norm(res, -1.0));
  }
  return worst;
}

double hom_h1_envelope_ratio(const HomLimitRun& run, double nu) {
  if (run.ledger.empty()) return 0.0;
  const double r0 = run.snapshots.front().r.empty() ? 0.0 : max_abs(run.snapshots.front().r.to_physical());
  const double g0 = run.ledger.front().grad_sq;
  double integral_u = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < run.ledger.size(); ++k) {
    if (k > 0) {
      const auto& a = run.ledger[k - 1];
      const auto& b = run.ledger[k];
      integral_u += 0.5 * (a.kinetic + b.kinetic) * (b.t - a.t);
    }
    const double bound = g0 + r0 * r0 / nu * integral_u;
    const double lhs = run.ledger[k].grad_sq;
    if (bound > 0.0) worst = std::max(worst, lhs / bound);
    else if (lhs > 0.0) worst = std::max(worst, HUGE_VAL);
  }
  return worst;
}

TwinReport stability_twin_test(const HomLimitState& base, const ScalarField& dr0, const VectorField& du0,
                               const HomLimitConfig& cfg, double budget) {
  const ScalarField dr = dr0.to_spectral();
  const VectorField du = leray_project(du0.to_spectral());
  auto perturbed = [&](double scale) {
    return HomLimitState{base.r.to_spectral() + scale * dr, base.u.to_spectral() + scale * du, 0.0};
  };
  const HomLimitRun a = run_hom_limit(base, cfg);
  const HomLimitRun b = run_hom_limit(perturbed(1.0), cfg);
  const HomLimitRun c = run_hom_limit(perturbed(0.5), cfg);
  if (a.snapshots.size() != b.snapshots.size() || a.snapshots.size() != c.snapshots.size())
    throw RuntimeFailure("twin runs produced different snapshot schedules");

  auto dist = [](const HomLimitState& x, const HomLimitState& y) {
    const double rl = l2_norm(x.r - y.r);
    return rl * rl + h1_sq(x.u - y.u);
  };
  TwinReport rep;
  rep.budget = budget;
  rep.data_norm = std::pow(l2_norm(dr), 2) + h1_sq(du);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k)
    rep.sup_response = std::max(rep.sup_response, dist(a.snapshots[k], b.snapshots[k]));
  rep.gronwall_ratio = rep.data_norm > 0.0 ? rep.sup_response / rep.data_norm : 0.0;
  rep.final_full = std::sqrt(dist(a.final_state, b.final_state));
  rep.final_half = std::sqrt(dist(a.final_state, c.final_state));
  if (rep.final_full > 0.0) {
    rep.linear_ratio = rep.final_half / rep.final_full;
    rep.pass = rep.gronwall_ratio <= budget && std::abs(rep.linear_ratio - 0.5) <= 0.2 * 0.5;
  } else {
    rep.pass = rep.sup_response == 0.0;
  }
  return rep;
}

ScalarField eta_from_omega(const ScalarField& omega, const ScalarField& rho0) {
  // psi = Lap^{-1} omega, eta = div(rho0 grad psi)
  const auto psi = inverse_laplacian(omega.to_spectral());
  const auto g = gradient(psi).to_physical();
  const auto rp = rho0.to_physical();
  return divergence(VectorField{multiply(rp, g.x).to_spectral(), multiply(rp, g.y).to_spectral()});
}

bool is_zonal(const ScalarField& f, double tol) {
  const ScalarField s = f.to_spectral();
  const Grid& g = s.grid();
  for (int row = 0; row < g.n(); ++row)
    for (int col = 1; col < g.nc(); ++col)
      if (std::abs(s.at_spec(row, col)) > tol) return false;
  return true;
}

namespace {

// Keeps only k1 = 0.
ScalarField x1_average(const ScalarField& f) {
  ScalarField s = f.to_spectral();
  const Grid& g = s.grid();
  for (int row = 0; row < g.n(); ++row)
    for (int col = 1; col < g.nc(); ++col) s.at_spec(row, col) = 0.0;
  return s;
}

void require_zonal(const ScalarField& rho0) {
  if (!is_zonal(rho0, 1e-12 * std::max(1.0, max_abs(rho0.to_physical()))))
    throw std::invalid_argument("reference density is not zonal (depends on x1)");
}

}  // namespace

VectorField zonal_project(const VectorField& u, const ScalarField& rho0) {
  require_zonal(rho0);
  return {x1_average(u.x), ScalarField::zeros(u.grid_ptr(), Representation::spectral)};
}

std::vector<TimeWindow> standard_windows(double t_end) {
  std::vector<TimeWindow> w;
  for (int i = 0; i < 10; ++i) w.push_back({t_end * i / 11.0, t_end * (i + 2) / 11.0});
  return w;
}

std::vector<double> zonal_limit_residual(const Trajectory& traj, const ScalarField& rho0, double epsilon, double nu,
                                         const std::vector<TimeWindow>& windows) {
  require_zonal(rho0);
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 2) throw std::invalid_argument("trajectory needs at least two snapshots");
  // zonal profiles of (eta - sigma) and d2^2 omega per snapshot
  std::vector<ScalarField> q, lap_om;
  q.reserve(snaps.size());
  lap_om.reserve(snaps.size());
  for (const auto& s : snaps) {
    const auto d = derived_fields(s.rho, s.u, rho0, epsilon, nu);
    q.push_back(x1_average(d.eta - d.sigma));
    lap_om.push_back(derivative(derivative(x1_average(d.omega), Axis::x2), Axis::x2));
  }
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    auto acc = ScalarField::zeros(rho0.grid_ptr(), Representation::spectral);
    for (std::size_t k = 1; k < snaps.size(); ++k) {
      const double t1 = snaps[k - 1].t, t2 = snaps[k].t, h = t2 - t1;
      if (h <= 0.0) continue;
      acc -= 0.5 * h * (w.derivative(t1) * q[k - 1] + w.derivative(t2) * q[k]);
      acc -= 0.5 * h * nu * (w.value(t1) * lap_om[k - 1] + w.value(t2) * lap_om[k]);
    }
    out.push_back(sobolev_norm(acc, -1.0));
  }
  return out;
}

}  // namespace nsc
