// solver.hpp
// Time integration of the variable-density Navier-Stokes-Coriolis system
//   d_t rho + div(rho u) = 0
//   rho (d_t u + u.grad u) + grad Pi / eps + rho u^perp / eps - nu Lap u = 0,  div u = 0
// on the 2-D torus, with energy ledger and weak-formulation diagnostics.
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsc/field.hpp"

namespace nsc {

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DensityFloorError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};
struct EllipticError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};
struct CflError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

struct TimeStepPolicy {
  double cfl_number = 0.4;         // dt <= c1 h / max|u|
  double coriolis_fraction = 0.5;  // dt <= c2 eps
  double dt_max = 1e-2;
};

struct SimConfig {
  double epsilon = 0.1;
  double nu = 0.05;
  int n = 64;
  double t_end = 1.0;
  TimeStepPolicy dt_policy;
  double density_floor = 0.1;
  bool dealias = true;
  double elliptic_tol = 1e-10;
  int elliptic_max_iter = 500;
  double hyperdiffusion = 0.0;
  double snapshot_interval = 0.01;  // 0: only the initial and final states
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class ReferenceDensity { constant, zonal, custom };

struct InitialData {
  ReferenceDensity kind = ReferenceDensity::constant;
  ScalarField rho_ref;  // rho_0
  ScalarField r0;       // rho_{0,eps} = rho_0 + eps r0
  VectorField u0;       // Leray-projected at assembly

  static InitialData make(GridPtr grid, ReferenceDensity kind, ScalarField r0, VectorField u0,
                          ScalarField custom_rho = {});
  ScalarField initial_density(double epsilon) const;
};

// Reference density 2 + sin x2.
ScalarField zonal_reference_density(GridPtr grid);
// Fraction of grid points with |grad rho0| <= delta.
double critical_level_measure(const ScalarField& rho0, double delta);

struct State {
  ScalarField rho;  // spectral
  VectorField u;    // spectral
  double t = 0.0;
};

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double kinetic = 0.0;      // int rho |u|^2
  double dissipation = 0.0;  // 2 nu int_0^t ||grad u||^2
  double mass = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double div_residual = 0.0;
  double coriolis_work = 0.0;  // int rho ubar^perp . ubar over the rotation substep
  int elliptic_iterations = 0;
};

struct EnergyLedger {
  std::vector<StepRecord> records;  // records[0] is the initial state
  // max over records of (kinetic + dissipation - kinetic_0) / kinetic_0 (0 for rest states)
  double max_relative_excess() const;
  double max_mass_drift() const;  // relative
};

struct Snapshot {
  double t = 0.0;
  ScalarField rho;
  VectorField u;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
};

struct StepInfo {
  double div_residual = 0.0;
  double coriolis_work = 0.0;
  int elliptic_iterations = 0;
};

class Stepper {
 public:
  explicit Stepper(const SimConfig& cfg);
  // Advances by exactly dt.
  State step(const State& s, double dt, StepInfo* info = nullptr) const;
  // dt allowed by the policy for the current state (before clamping to output times).
  double policy_dt(const State& s) const;
  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
  GridPtr grid_;
};

struct RunResult {
  Trajectory trajectory;
  EnergyLedger ledger;
  State final_state;
};

using StepObserver = std::function<void(const State&)>;

// Iterates to t_end. Snapshots land exactly on multiples of snapshot_interval.
// Observers see every accepted state, the initial one included.
RunResult run(const SimConfig& cfg, const InitialData& init, const std::vector<StepObserver>& observers = {});

// Smooth window ((t-a)(b-t))^4 normalized to peak 1 on (a, b), zero elsewhere.
struct TimeWindow {
  double a = 0.0;
  double b = 1.0;
  double value(double t) const;
  double derivative(double t) const;
};

// Space-time test function phi(x) w(t). For momentum, psi = grad^perp phi.
struct WeakTest {
  ScalarField phi;
  TimeWindow window;
};

// Running trapezoid-in-time evaluation of the weak residuals; samples must arrive in time order.
class WeakResidualAccumulator {
 public:
  enum class Kind { mass, momentum };
  WeakResidualAccumulator(Kind kind, WeakTest test, double epsilon, double nu, double t_end);
  void sample(const State& s);
  double value() const;

 private:
  double integrand(const State& s) const;
  Kind kind_;
  WeakTest test_;
  double epsilon_, nu_;
  ScalarField phi_phys_;
  VectorField grad_phi_, psi_, lap_psi_;
  ScalarField d1psi1_, d2psi1_, d1psi2_, d2psi2_;
  bool started_ = false;
  double last_t_ = 0.0, last_g_ = 0.0, sum_ = 0.0;
};

double weak_residual_mass(const Trajectory& traj, const WeakTest& test, double t_end);
double weak_residual_momentum(const Trajectory& traj, const WeakTest& test, double epsilon, double nu, double t_end);

// Default bank: three low modes times two windows covering [0, t_end].
std::vector<WeakTest> standard_test_bank(GridPtr grid, double t_end);

struct DerivedFields {
  ScalarField sigma;  // (rho - rho0) / eps
  VectorField V;      // rho u
  ScalarField eta;    // curl V
  ScalarField omega;  // curl u
  VectorField f;      // -div(rho u (x) u) + nu Lap u
};

DerivedFields derived_fields(const ScalarField& rho, const VectorField& u, const ScalarField& rho0, double epsilon,
                             double nu);

// max over consecutive snapshot pairs of the H^-2 norm of
//   [(eta - sigma)(t2) - (eta - sigma)(t1)] / (t2 - t1) - (curl f(t1) + curl f(t2)) / 2
double vorticity_form_residual(const Trajectory& traj, const ScalarField& rho0, double epsilon, double nu);

}  // namespace nsc
