#include "nsc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsc/operators.hpp"

namespace nsc {

void SimConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw std::invalid_argument(key + ": " + what);
  };
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon", "must lie in (0, 1]");
  if (!(nu > 0.0)) fail("nu", "must be positive");
  if (n < 16 || (n & (n - 1)) != 0) fail("n", "must be a power of two >= 16");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end", "must be finite and non-negative");
  if (!(dt_policy.cfl_number > 0.0 && dt_policy.cfl_number <= 1.0)) fail("time_step.cfl_number", "must lie in (0, 1]");
  if (!(dt_policy.coriolis_fraction > 0.0 && dt_policy.coriolis_fraction <= 1.0))
    fail("time_step.coriolis_fraction", "must lie in (0, 1]");
  if (!(dt_policy.dt_max > 0.0)) fail("time_step.dt_max", "must be positive");
  if (!(density_floor > 0.0)) fail("density_floor", "must be positive");
  if (!(elliptic_tol > 0.0)) fail("elliptic.tol", "must be positive");
  if (elliptic_max_iter < 1) fail("elliptic.max_iter", "must be at least 1");
  if (!(hyperdiffusion >= 0.0)) fail("hyperdiffusion", "must be non-negative");
  if (!(snapshot_interval >= 0.0)) fail("snapshot_interval", "must be non-negative");
}

ScalarField zonal_reference_density(GridPtr grid) {
  return ScalarField::from_function(std::move(grid), [](double, double y) { return 2.0 + std::sin(y); });
}

double critical_level_measure(const ScalarField& rho0, double delta) {
  const auto g = gradient(rho0);
  const auto gx = g.x.to_physical(), gy = g.y.to_physical();
  std::size_t count = 0;
  for (std::size_t i = 0; i < gx.values().size(); ++i)
    if (std::hypot(gx.values()[i], gy.values()[i]) <= delta) ++count;
  return static_cast<double>(count) / static_cast<double>(gx.values().size());
}

InitialData InitialData::make(GridPtr grid, ReferenceDensity kind, ScalarField r0, VectorField u0,
                              ScalarField custom_rho) {
  InitialData d;
  d.kind = kind;
  switch (kind) {
    case ReferenceDensity::constant:
      d.rho_ref = ScalarField::constant(grid, 1.0).to_spectral();
      break;
    case ReferenceDensity::zonal:
      d.rho_ref = zonal_reference_density(grid).to_spectral();
      break;
    case ReferenceDensity::custom:
      if (custom_rho.empty()) throw std::invalid_argument("initial.rho_ref: custom density missing");
      d.rho_ref = custom_rho.to_spectral();
      break;
  }
  d.r0 = r0.empty() ? ScalarField::zeros(grid, Representation::spectral) : r0.to_spectral();
  d.u0 = u0.x.empty() ? VectorField::zeros(grid, Representation::spectral) : leray_project(u0.to_spectral());
  return d;
}

ScalarField InitialData::initial_density(double epsilon) const { return rho_ref + epsilon * r0; }

double EnergyLedger::max_relative_excess() const {
  if (records.empty()) return 0.0;
  const double e0 = records.front().kinetic;
  double worst = 0.0;
  for (const auto& r : records) {
    const double excess = r.kinetic + r.dissipation - e0;
    worst = std::max(worst, e0 > 0.0 ? excess / e0 : excess);
  }
  return worst;
}

double EnergyLedger::max_mass_drift() const {
  if (records.empty()) return 0.0;
  const double m0 = records.front().mass;
  double worst = 0.0;
  for (const auto& r : records) worst = std::max(worst, std::abs(r.mass - m0) / std::abs(m0));
  return worst;
}

namespace {

// Solver for div(b (I - a J) grad q) = g with b = 1/rho, J v = v^perp, by Richardson iteration
// preconditioned with the constant-coefficient operator bbar Lap.
class WeightedElliptic {
 public:
  WeightedElliptic(const ScalarField& rho, double tol, int max_iter) : tol_(tol), max_iter_(max_iter) {
    inv_rho_ = rho.to_physical();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto& v : inv_rho_.values()) {
      v = 1.0 / v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    bbar_ = 0.5 * (lo + hi);
  }

  const ScalarField& inv_rho() const { return inv_rho_; }

  // (1/rho) (I - a J) grad q, physical
  VectorField flux(const ScalarField& q, double a) const {
    const auto g = gradient(q).to_physical();
    VectorField out = g;
    auto ox = out.x.values(), oy = out.y.values();
    const auto gx = g.x.values(), gy = g.y.values();
    const auto b = inv_rho_.values();
    for (std::size_t i = 0; i < ox.size(); ++i) {
      // (I - a J) v = (v1 + a v2, v2 - a v1)
      ox[i] = b[i] * (gx[i] + a * gy[i]);
      oy[i] = b[i] * (gy[i] - a * gx[i]);
    }
    return out;
  }

  ScalarField solve(const ScalarField& rhs, double a, int& iterations) const {
    const ScalarField g = rhs.to_spectral();
    const Grid& grid = g.grid();
    auto q = ScalarField::zeros(g.grid_ptr(), Representation::spectral);
    for (int it = 0; it <= max_iter_; ++it) {
      ScalarField r = g - divergence(flux(q, a).to_spectral());
      r.at_spec(0, 0) = 0.0;
      if (l2_norm(r) <= tol_) {
        iterations = it;
        return q;
      }
      for (int row = 0; row < grid.n(); ++row)
        for (int col = 0; col < grid.nc(); ++col) {
          const double k1 = grid.k1_odd(col), k2 = grid.k2_odd(row);
          const double kk = k1 * k1 + k2 * k2;
          if (kk > 0.0) q.at_spec(row, col) -= r.at_spec(row, col) / (bbar_ * kk);
        }
    }
    throw EllipticError("weighted elliptic solve did not reach tolerance " + std::to_string(tol_) + " in " +
                        std::to_string(max_iter_) + " iterations");
  }

 private:
  ScalarField inv_rho_;
  double bbar_ = 1.0;
  double tol_;
  int max_iter_;
};

// u <- u - grad(phi)/rho with div((1/rho) grad phi) = div u.
VectorField weighted_project(const WeightedElliptic& op, const VectorField& u, int& iters) {
  const auto phi = op.solve(divergence(u), 0.0, iters);
  return u - op.flux(phi, 0.0).to_spectral();
}

// Implicit-midpoint step of d_t u = -(u^perp + grad Pi / rho) / eps over dt, div-free in and out:
//   w + a w^perp = b - grad(q)/rho,  b = u - a u^perp,  a = dt / (2 eps)
//   w = (I - aJ)(b - grad(q)/rho) / (1 + a^2),  div((1/rho)(I - aJ) grad q) = div((I - aJ) b).
VectorField coriolis_step(const WeightedElliptic& op, const VectorField& u, double a, int& iters, double& work) {
  const VectorField b{u.x + a * u.y, u.y - a * u.x};  // u - a u^perp
  const VectorField ib{b.x + a * b.y, b.y - a * b.x};  // (I - aJ) b
  const auto q = op.solve(divergence(ib), a, iters);
  const auto fl = op.flux(q, a).to_spectral();
  VectorField w = (ib - fl) * (1.0 / (1.0 + a * a));
  // work of the rotation on the midpoint velocity, pointwise zero
  const auto m = ((u + w) * 0.5).to_physical();
  const auto inv_rho = op.inv_rho().values();
  double s = 0.0;
  for (std::size_t i = 0; i < inv_rho.size(); ++i) {
    const double ux = m.x.values()[i], uy = m.y.values()[i];
    s += (-uy * ux + ux * uy) / inv_rho[i];
  }
  work = std::abs(s) * u.grid().area() / static_cast<double>(inv_rho.size());
  return w;
}

ScalarField maybe_dealias(const ScalarField& f, bool on) { return on ? dealias(f.to_spectral()) : f.to_spectral(); }

struct Rhs {
  ScalarField rho;
  VectorField u;
};

// Explicit part: transport of rho in flux form, advection of u, and the viscous remainder
// nu (1/rho - c) Lap u beyond the integrating factor.
Rhs explicit_rhs(const ScalarField& rho, const VectorField& u, double nu, double c, bool dl) {
  const auto rp = rho.to_physical();
  const auto up = u.to_physical();
  Rhs out;
  const VectorField flux{multiply(rp, up.x), multiply(rp, up.y)};
  out.rho = -divergence(VectorField{maybe_dealias(flux.x, dl), maybe_dealias(flux.y, dl)});

  const auto gx = gradient(u.x).to_physical();
  const auto gy = gradient(u.y).to_physical();
  const auto lap = laplacian(u).to_physical();
  auto adv_x = ScalarField::zeros(u.grid_ptr()), adv_y = ScalarField::zeros(u.grid_ptr());
  auto ax = adv_x.values(), ay = adv_y.values();
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double u1 = up.x.values()[i], u2 = up.y.values()[i];
    const double visc = nu * (1.0 / rp.values()[i] - c);
    ax[i] = -(u1 * gx.x.values()[i] + u2 * gx.y.values()[i]) + visc * lap.x.values()[i];
    ay[i] = -(u1 * gy.x.values()[i] + u2 * gy.y.values()[i]) + visc * lap.y.values()[i];
  }
  out.u = {maybe_dealias(adv_x, dl), maybe_dealias(adv_y, dl)};
  return out;
}

ScalarField scale_symbol(const ScalarField& f, const std::function<double(double)>& sym) {
  ScalarField s = f.to_spectral();
  const Grid& g = s.grid();
  for (int row = 0; row < g.n(); ++row)
    for (int col = 0; col < g.nc(); ++col) s.at_spec(row, col) *= sym(g.ksq(row, col));
  return s;
}

// Logarithmic mean: the exact step average of an exponentially decaying integrand.
double log_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.5 * (a + b);
  const double r = b / a;
  if (std::abs(r - 1.0) < 1e-6) return 0.5 * (a + b) - (a - b) * (a - b) / (12.0 * (a + b));
  return (a - b) / std::log(a / b);
}

double grad_sq(const VectorField& u) {
  const double a = l2_norm(gradient(u.x)), b = l2_norm(gradient(u.y));
  return a * a + b * b;
}

double kinetic(const ScalarField& rho, const VectorField& u) {
  const auto r = rho.to_physical();
  const auto up = u.to_physical();
  double s = 0.0;
  for (std::size_t i = 0; i < r.values().size(); ++i) {
    const double a = up.x.values()[i], b = up.y.values()[i];
    s += r.values()[i] * (a * a + b * b);
  }
  return s * rho.grid().area() / static_cast<double>(r.values().size());
}

}  // namespace

Stepper::Stepper(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  grid_ = make_grid(cfg_.n);
}

double Stepper::policy_dt(const State& s) const {
  double dt = std::min(cfg_.dt_policy.dt_max, cfg_.dt_policy.coriolis_fraction * cfg_.epsilon);
  const double umax = max_abs(s.u.to_physical());
  if (umax > 0.0) dt = std::min(dt, cfg_.dt_policy.cfl_number * grid_->h() / umax);
  return dt;
}

State Stepper::step(const State& s, double dt, StepInfo* info) const {
  const double h = grid_->h();
  const double umax0 = max_abs(s.u.to_physical());
  if (umax0 * dt / h > 1.0) throw CflError("CFL number " + std::to_string(umax0 * dt / h) + " exceeds 1");

  const double nu = cfg_.nu, kappa = cfg_.hyperdiffusion;
  const double a = dt / (4.0 * cfg_.epsilon);  // half-step rotation: (dt/2) / (2 eps)
  StepInfo local;
  int iters = 0;
  double work = 0.0;

  // half rotation with the current density
  WeightedElliptic op_n(s.rho, cfg_.elliptic_tol, cfg_.elliptic_max_iter);
  VectorField u = coriolis_step(op_n, s.u, a, iters, work);
  local.elliptic_iterations += iters;
  local.coriolis_work = std::max(local.coriolis_work, work);

  // explicit transport / advection / viscosity with integrating factor e^{-nu c |k|^2 dt}
  double c = 0.0;
  for (double v : op_n.inv_rho().values()) c = std::max(c, v);
  auto Eu = [&](const VectorField& v) {
    auto f = [&](double kk) { return std::exp(-nu * c * kk * dt); };
    return VectorField{scale_symbol(v.x, f), scale_symbol(v.y, f)};
  };
  auto Er = [&](const ScalarField& r) {
    if (kappa == 0.0) return r.to_spectral();
    return scale_symbol(r, [&](double kk) { return std::exp(-kappa * kk * kk * dt); });
  };

  const Rhs n0 = explicit_rhs(s.rho, u, nu, c, cfg_.dealias);
  ScalarField rho1 = Er(s.rho + dt * n0.rho);
  // Project before the integrating factor, with rho^n: the weighted projection does not
  // commute with E, and either swap costs a full order in time.
  const VectorField pn0 = weighted_project(op_n, n0.u, iters);
  local.elliptic_iterations += iters;
  VectorField u1 = Eu(u + dt * pn0);
  const Rhs n1 = explicit_rhs(rho1, u1, nu, c, cfg_.dealias);
  State out;
  out.t = s.t + dt;
  out.rho = 0.5 * (Er(s.rho) + rho1 + dt * n1.rho);
  VectorField ustar = 0.5 * (Eu(u) + u1 + dt * n1.u);

  const auto rp = out.rho.to_physical();
  const double rmin = min_value(rp);
  if (rmin < cfg_.density_floor * (1.0 - 1e-6))
    throw DensityFloorError("density " + std::to_string(rmin) + " below floor " + std::to_string(cfg_.density_floor) +
                            " at t = " + std::to_string(out.t));

  WeightedElliptic op_np1(out.rho, cfg_.elliptic_tol, cfg_.elliptic_max_iter);
  ustar = weighted_project(op_np1, ustar, iters);
  local.elliptic_iterations += iters;
  out.u = coriolis_step(op_np1, ustar, a, iters, work);
  local.elliptic_iterations += iters;
  local.coriolis_work = std::max(local.coriolis_work, work);
  local.div_residual = l2_norm(divergence(out.u));

  const double umax1 = max_abs(out.u.to_physical());
  if (umax1 * dt / h > 1.0) throw CflError("CFL number " + std::to_string(umax1 * dt / h) + " exceeds 1 after step");
  if (info) *info = local;
  return out;
}

RunResult run(const SimConfig& cfg, const InitialData& init, const std::vector<StepObserver>& observers) {
  Stepper stepper(cfg);
  const GridPtr grid = make_grid(cfg.n);
  State s;
  s.rho = init.initial_density(cfg.epsilon).to_spectral();
  s.u = init.u0.to_spectral();
  s.t = 0.0;
  if (min_value(s.rho.to_physical()) < cfg.density_floor)
    throw DensityFloorError("initial density below floor " + std::to_string(cfg.density_floor));

  RunResult res;
  auto record = [&](const State& st, double dt, const StepInfo& info, double dissipation) {
    StepRecord r;
    r.t = st.t;
    r.dt = dt;
    r.kinetic = kinetic(st.rho, st.u);
    r.dissipation = dissipation;
    const auto rp = st.rho.to_physical();
    r.mass = integral(rp);
    r.rho_min = min_value(rp);
    r.rho_max = max_value(rp);
    r.div_residual = info.div_residual;
    r.coriolis_work = info.coriolis_work;
    r.elliptic_iterations = info.elliptic_iterations;
    res.ledger.records.push_back(r);
  };
  StepInfo info0;
  info0.div_residual = l2_norm(divergence(s.u));
  record(s, 0.0, info0, 0.0);
  res.trajectory.snapshots.push_back({s.t, s.rho, s.u});
  for (const auto& obs : observers) obs(s);

  const double T = cfg.t_end;
  const double every = cfg.snapshot_interval;
  long next_index = 1;
  double dissipation = 0.0;
  double gsq = grad_sq(s.u);
  const double tiny = 1e-12 * std::max(1.0, T);
  while (s.t < T - tiny) {
    double dt = stepper.policy_dt(s);
    double target = T;
    if (every > 0.0) target = std::min(T, every * static_cast<double>(next_index));
    bool hit = false;
    if (s.t + dt >= target - tiny) {
      dt = target - s.t;
      hit = true;
    } else if (s.t + 2.0 * dt > target) {
      dt = 0.5 * (target - s.t);  // avoid a sliver step before the output time
    }
    StepInfo info;
    State next = stepper.step(s, dt, &info);
    if (hit) next.t = target;
    const double g1 = grad_sq(next.u);
    dissipation += 2.0 * cfg.nu * dt * log_mean(gsq, g1);
    gsq = g1;
    s = std::move(next);
    record(s, dt, info, dissipation);
    for (const auto& obs : observers) obs(s);
    if (hit && every > 0.0 && target < T - tiny) {
      res.trajectory.snapshots.push_back({s.t, s.rho, s.u});
      ++next_index;
    }
  }
  if (res.trajectory.snapshots.back().t < s.t) res.trajectory.snapshots.push_back({s.t, s.rho, s.u});
  res.final_state = s;
  return res;
}

// ---- weak formulation -------------------------------------------------------

double TimeWindow::value(double t) const {
  if (t <= a || t >= b) return 0.0;
  const double m = 0.5 * (b - a);
  const double p = (t - a) * (b - t) / (m * m);
  return p * p * p * p;
}

double TimeWindow::derivative(double t) const {
  if (t <= a || t >= b) return 0.0;
  const double m = 0.5 * (b - a);
  const double p = (t - a) * (b - t) / (m * m);
  const double dp = (a + b - 2.0 * t) / (m * m);
  return 4.0 * p * p * p * dp;
}

WeakResidualAccumulator::WeakResidualAccumulator(Kind kind, WeakTest test, double epsilon, double nu, double t_end)
    : kind_(kind), test_(std::move(test)), epsilon_(epsilon), nu_(nu) {
  if (test_.window.b > t_end + 1e-12)
    throw std::invalid_argument("weak residual: time window must be supported in [0, t_end)");
  phi_phys_ = test_.phi.to_physical();
  grad_phi_ = gradient(test_.phi).to_physical();
  const auto psi = perp_gradient(test_.phi);
  psi_ = psi.to_physical();
  lap_psi_ = laplacian(psi).to_physical();
  d1psi1_ = derivative(psi.x, Axis::x1).to_physical();
  d2psi1_ = derivative(psi.x, Axis::x2).to_physical();
  d1psi2_ = derivative(psi.y, Axis::x1).to_physical();
  d2psi2_ = derivative(psi.y, Axis::x2).to_physical();
}

double WeakResidualAccumulator::integrand(const State& s) const {
  const double t = s.t;
  const double w = test_.window.value(t), dw = test_.window.derivative(t);
  if (w == 0.0 && dw == 0.0) return 0.0;
  const auto rho = s.rho.to_physical();
  const auto u = s.u.to_physical();
  const std::size_t N = rho.values().size();
  const double cell = rho.grid().area() / static_cast<double>(N);
  double acc = 0.0;
  if (kind_ == Kind::mass) {
    // -w' rho phi - w rho u . grad phi
    for (std::size_t i = 0; i < N; ++i) {
      const double r = rho.values()[i];
      acc += -dw * r * phi_phys_.values()[i] -
             w * r * (u.x.values()[i] * grad_phi_.x.values()[i] + u.y.values()[i] * grad_phi_.y.values()[i]);
    }
  } else {
    // -w' rho u.psi - w rho u(x)u : grad psi + (w/eps) rho u^perp.psi - nu w u . Lap psi
    for (std::size_t i = 0; i < N; ++i) {
      const double r = rho.values()[i];
      const double u1 = u.x.values()[i], u2 = u.y.values()[i];
      const double p1 = psi_.x.values()[i], p2 = psi_.y.values()[i];
      const double conv = u1 * u1 * d1psi1_.values()[i] + u1 * u2 * d2psi1_.values()[i] +
                          u2 * u1 * d1psi2_.values()[i] + u2 * u2 * d2psi2_.values()[i];
      const double cor = -u2 * p1 + u1 * p2;
      const double visc = u1 * lap_psi_.x.values()[i] + u2 * lap_psi_.y.values()[i];
      acc += -dw * r * (u1 * p1 + u2 * p2) - w * r * conv + (w / epsilon_) * r * cor - nu_ * w * visc;
    }
  }
  return acc * cell;
}

void WeakResidualAccumulator::sample(const State& s) {
  const double g = integrand(s);
  if (!started_) {
    started_ = true;
    // initial-data term: -w(0) int rho0 phi  or  -w(0) int rho0 u0 . psi
    const double w0 = test_.window.value(s.t);
    if (w0 != 0.0) {
      const auto rho = s.rho.to_physical();
      const std::size_t N = rho.values().size();
      const double cell = rho.grid().area() / static_cast<double>(N);
      double acc = 0.0;
      if (kind_ == Kind::mass) {
        for (std::size_t i = 0; i < N; ++i) acc += rho.values()[i] * phi_phys_.values()[i];
      } else {
        const auto u = s.u.to_physical();
        for (std::size_t i = 0; i < N; ++i)
          acc += rho.values()[i] * (u.x.values()[i] * psi_.x.values()[i] + u.y.values()[i] * psi_.y.values()[i]);
      }
      sum_ -= w0 * acc * cell;
    }
  } else {
    sum_ += 0.5 * (s.t - last_t_) * (g + last_g_);
  }
  last_t_ = s.t;
  last_g_ = g;
}

double WeakResidualAccumulator::value() const { return sum_; }

namespace {

double residual_over(const Trajectory& traj, WeakResidualAccumulator acc) {
  for (const auto& snap : traj.snapshots) acc.sample(State{snap.rho, snap.u, snap.t});
  return acc.value();
}

}  // namespace

double weak_residual_mass(const Trajectory& traj, const WeakTest& test, double t_end) {
  return residual_over(traj, WeakResidualAccumulator(WeakResidualAccumulator::Kind::mass, test, 1.0, 0.0, t_end));
}

double weak_residual_momentum(const Trajectory& traj, const WeakTest& test, double epsilon, double nu, double t_end) {
  return residual_over(traj,
                       WeakResidualAccumulator(WeakResidualAccumulator::Kind::momentum, test, epsilon, nu, t_end));
}

std::vector<WeakTest> standard_test_bank(GridPtr grid, double t_end) {
  std::vector<ScalarField> phis{
      ScalarField::from_function(grid, [](double x, double) { return std::cos(x); }),
      ScalarField::from_function(grid, [](double, double y) { return std::sin(y); }),
      ScalarField::from_function(grid, [](double x, double y) { return std::cos(x + 2.0 * y); }),
  };
  std::vector<WeakTest> bank;
  for (const auto& p : phis) {
    bank.push_back({p.to_spectral(), {-0.5 * t_end, 0.75 * t_end}});  // nonzero at t = 0
    bank.push_back({p.to_spectral(), {0.25 * t_end, t_end}});
  }
  return bank;
}

// ---- derived fields ---------------------------------------------------------

DerivedFields derived_fields(const ScalarField& rho, const VectorField& u, const ScalarField& rho0, double epsilon,
                             double nu) {
  DerivedFields d;
  d.sigma = (rho.to_spectral() - rho0.to_spectral()) * (1.0 / epsilon);
  const auto rp = rho.to_physical();
  const auto up = u.to_physical();
  d.V = VectorField{multiply(rp, up.x).to_spectral(), multiply(rp, up.y).to_spectral()};
  d.eta = curl(d.V);
  d.omega = curl(u.to_spectral());
  // -div(rho u (x) u): component i is -d_j (rho u_i u_j)
  const auto m11 = multiply(rp, up.x, up.x).to_spectral();
  const auto m12 = multiply(rp, up.x, up.y).to_spectral();
  const auto m22 = multiply(rp, up.y, up.y).to_spectral();
  const auto lap = laplacian(u.to_spectral());
  d.f = VectorField{-(derivative(m11, Axis::x1) + derivative(m12, Axis::x2)) + nu * lap.x,
                    -(derivative(m12, Axis::x1) + derivative(m22, Axis::x2)) + nu * lap.y};
  return d;
}

double vorticity_form_residual(const Trajectory& traj, const ScalarField& rho0, double epsilon, double nu) {
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    const auto& s1 = traj.snapshots[k - 1];
    const auto& s2 = traj.snapshots[k];
    const double dt = s2.t - s1.t;
    if (dt <= 0.0) continue;
    const auto d1 = derived_fields(s1.rho, s1.u, rho0, epsilon, nu);
    const auto d2 = derived_fields(s2.rho, s2.u, rho0, epsilon, nu);
    const auto lhs = ((d2.eta - d2.sigma) - (d1.eta - d1.sigma)) * (1.0 / dt);
    const auto rhs = 0.5 * (curl(d1.f) + curl(d2.f));
    worst = std::max(worst, sobolev_norm(lhs - rhs, -2.0));
  }
  return worst;
}

}  // namespace nsc
