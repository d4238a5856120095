// harness.hpp
// Epsilon sweeps and the convergence metrics evaluated on them.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsc/field.hpp"
#include "nsc/limit.hpp"
#include "nsc/solver.hpp"

namespace nsc {

// Sampled fields on a common time grid.
template <class F>
struct Series {
  std::vector<double> t;
  std::vector<F> f;
};
using VectorSeries = Series<VectorField>;
using ScalarSeries = Series<ScalarField>;

VectorSeries velocity_series(const Trajectory& traj);
VectorSeries velocity_series(const std::vector<HomLimitState>& traj);
// sigma = (rho - rho0) / eps
ScalarSeries sigma_series(const Trajectory& traj, const ScalarField& rho0, double epsilon);
// s = rho - rho0
ScalarSeries s_series(const Trajectory& traj, const ScalarField& rho0);
ScalarSeries r_series(const std::vector<HomLimitState>& traj);

// (int_0^T ||a - b||^2 dt)^{1/2}, trapezoid in time. Throws std::invalid_argument on
// mismatched sampling.
double metric_strong(const VectorSeries& a, const VectorSeries& b);
double metric_strong(const ScalarSeries& a, const ScalarSeries& b);

// max over |k| <= K, both components and the windows of |int (a_hat - b_hat)(k, t) w(t) dt|.
double metric_weak(const VectorSeries& a, const VectorSeries& b, int K, const std::vector<TimeWindow>& windows);

// Windowed time average of u.grad rho0, max over windows of its H^-1 norm.
double metric_constraint(const VectorSeries& u, const ScalarField& rho0, const std::vector<TimeWindow>& windows);
// Max over windows of ||ubar - Z ubar||^2 / ||ubar||^2 for the windowed average ubar (zonal rho0 only).
double nonzonal_fraction(const VectorSeries& u, const ScalarField& rho0, const std::vector<TimeWindow>& windows);

// sup_t ||sigma||_{H^-2.5}
double metric_sigma_bound(const ScalarSeries& sigma);
// sup_t ||s||_{H^-k} / eps^theta
double metric_s_decay(const ScalarSeries& s, double epsilon, double theta, double k = 0.75);

struct FitResult {
  bool ok = false;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log residuals
  std::string reason;     // set when !ok
};

// Least squares of log(value) against log(eps). Needs >= 3 points, all positive.
FitResult fit_rate(const std::vector<double>& eps, const std::vector<double>& values);

enum class SweepKind { hom, dens };

// r0 = cos x1 + sin x2, u0 = P(sin x2 cos x1, 0) + (sin x2, 0) over the chosen reference density.
InitialData default_sweep_data(GridPtr grid, SweepKind kind);

struct SweepConfig {
  SweepKind kind = SweepKind::hom;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  SimConfig base;                   // epsilon overridden per run
  HomLimitConfig limit;             // hom comparisons only
  std::optional<std::vector<std::string>> metrics;  // unset: all metrics of the kind; empty: runs only
  int weak_modes = 8;
  int threads = 1;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending key.
  void validate() const;
  // Time step shared by every run of the sweep: min(dt_max, c2 min eps).
  double shared_dt() const;
};

std::vector<std::string> metric_names(SweepKind kind);

struct RunSummary {
  double epsilon = 0.0;
  std::size_t steps = 0;
  double final_time = 0.0;
  double energy_excess = 0.0;
  double mass_drift = 0.0;
  double wall_seconds = 0.0;
};

struct MetricSeries {
  std::string name;
  std::vector<double> values;  // per epsilon, sweep order
  FitResult fit;
  std::string expectation;
  bool pass = false;
};

struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<RunSummary> runs;
  std::vector<MetricSeries> metrics;
  bool partial = false;
  std::string error;

  const MetricSeries* find(const std::string& name) const;
};

struct SweepRun {
  double epsilon = 0.0;
  RunResult result;
};

// Runs every epsilon on up to cfg.threads threads (and the hom limit when needed), evaluates
// the metrics and judges them. A failed run leaves a partial report without metrics.
// The completed runs are moved into runs_out, in sweep order, when it is given.
ConvergenceReport run_sweep(const SweepConfig& cfg, const InitialData& init, std::vector<SweepRun>* runs_out = nullptr);

// Strictly decreasing as eps decreases (values listed in sweep order).
bool strictly_decreasing(const std::vector<double>& values);

}  // namespace nsc
