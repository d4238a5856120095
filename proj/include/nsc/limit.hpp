// limit.hpp
// Solvers and diagnostics for the two fast-rotation limits:
//   homogeneous:  d_t r + div(r u) = 0,  d_t u + div(u (x) u) + grad Pi + r u^perp - nu Lap u = 0,  div u = 0
//   zonal:        d_t <eta - sigma> - nu d2^2 <omega> = 0 for rho0 = 2 + sin x2
#pragma once

#include <vector>

#include "nsc/field.hpp"
#include "nsc/solver.hpp"

namespace nsc {

struct HomLimitState {
  ScalarField r;  // spectral
  VectorField u;  // spectral, divergence-free
  double t = 0.0;
};

struct HomStepRecord {
  double t = 0.0;
  double kinetic = 0.0;      // ||u||^2
  double dissipation = 0.0;  // 2 nu int ||grad u||^2 (log-mean quadrature)
  double grad_sq = 0.0;      // ||grad u||^2
  double r_l2 = 0.0;
  double r_inf = 0.0;
  double coupling_work = 0.0;  // |int r u^perp . u|
  double div_u = 0.0;
};

struct HomLimitConfig {
  double nu = 0.05;
  double t_end = 1.0;
  double dt_max = 1e-2;
  double cfl_number = 0.4;
  double snapshot_interval = 0.01;
  bool dealias = true;
};

struct HomLimitRun {
  std::vector<HomLimitState> snapshots;
  std::vector<HomStepRecord> ledger;
  HomLimitState final_state;
};

HomLimitState make_hom_state(const ScalarField& r0, const VectorField& u0);

// One IF-RK2 step with constant-coefficient projection; throws CflError.
HomLimitState hom_limit_step(const HomLimitState& s, double nu, double dt, bool dealias = true);

// Fixed-step driver: dt = min(dt_max, CFL), clamped onto snapshot times.
HomLimitRun run_hom_limit(const HomLimitState& init, const HomLimitConfig& cfg);

// max over consecutive samples of the H^-1 norm of
//   [(omega - r)(t2) - (omega - r)(t1)] / dt + avg(u.grad omega - nu Lap omega)
double hom_limit_vorticity_residual(const std::vector<HomLimitState>& traj, double nu);

// H^1 envelope from the run's data:
//   ||grad u(t)||^2 <= ||grad u0||^2 + (||r0||_inf^2 / nu) int_0^t ||u||^2
// Returns max over the ledger of lhs / rhs.
double hom_h1_envelope_ratio(const HomLimitRun& run, double nu);

struct TwinReport {
  double data_norm = 0.0;      // ||dr0||^2 + ||du0||_{H^1}^2
  double sup_response = 0.0;   // sup_t ||dr||^2 + ||du||_{H^1}^2
  double gronwall_ratio = 0.0;  // sup_response / data_norm
  double final_full = 0.0;     // final (||dr||^2 + ||du||_{H^1}^2)^{1/2}, full perturbation
  double final_half = 0.0;     // same with the perturbation halved
  double linear_ratio = 0.0;   // final_half / final_full, 0.5 for linear response (0 if no response)
  double budget = 1e4;
  bool pass = false;
};

// Runs base, base + delta and base + delta/2 with the hom-limit solver.
TwinReport stability_twin_test(const HomLimitState& base, const ScalarField& dr0, const VectorField& du0,
                               const HomLimitConfig& cfg, double budget = 1e4);

// -div(rho0 grad (-Lap)^{-1} omega); throws on nonzero mean.
ScalarField eta_from_omega(const ScalarField& omega, const ScalarField& rho0);

// True when every coefficient with k1 != 0 is below tol.
bool is_zonal(const ScalarField& f, double tol = 1e-12);

// (<u1>(x2), 0); throws std::invalid_argument unless rho0 is zonal.
VectorField zonal_project(const VectorField& u, const ScalarField& rho0);

// Ten overlapping windows of width 2T/11 covering [0, T].
std::vector<TimeWindow> standard_windows(double t_end);

// Per window w: H^-1 norm of the x2-profile
//   -int w'(t) <eta - sigma>(t) dt - nu int w(t) d2^2 <omega>(t) dt
// Throws unless rho0 is zonal.
std::vector<double> zonal_limit_residual(const Trajectory& traj, const ScalarField& rho0, double epsilon, double nu,
                                         const std::vector<TimeWindow>& windows);

}  // namespace nsc
