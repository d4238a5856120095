#include <doctest.h>

#include <cmath>
#include <random>

#include "nsc/harness.hpp"
#include "nsc/operators.hpp"

using namespace nsc;

namespace {

ScalarField sin_x1(GridPtr g) {
  return ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
}

// Stationary series of a fixed field on n+1 equispaced samples of [0, T].
VectorSeries constant_series(const VectorField& u, int samples, double T) {
  VectorSeries s;
  for (int k = 0; k <= samples; ++k) {
    s.t.push_back(T * k / samples);
    s.f.push_back(u.to_spectral());
  }
  return s;
}

SweepConfig tiny_sweep(SweepKind kind) {
  SweepConfig c;
  c.kind = kind;
  c.epsilons = {0.2, 0.1, 0.05};
  c.base.n = 32;
  c.base.t_end = 0.3;
  c.base.snapshot_interval = 0.02;
  return c;
}

}  // namespace

TEST_CASE("metric_strong") {
  const auto g = make_grid(32);
  std::mt19937_64 rng(1);
  const VectorField u{random_field(g, rng, 4), random_field(g, rng, 4)};
  const auto a = constant_series(u, 20, 2.0);
  CHECK(metric_strong(a, a) == 0.0);

  const double c = 0.3;
  const auto b = constant_series(u + VectorField{c * sin_x1(g), ScalarField::zeros(g)}, 20, 2.0);
  // ||sin x1||_{L^2} = pi sqrt(2)
  CHECK(metric_strong(a, b) == doctest::Approx(c * M_PI * std::sqrt(2.0) * std::sqrt(2.0)).epsilon(1e-12));

  ScalarSeries sa{{0.0, 1.0}, {sin_x1(g), sin_x1(g)}};
  ScalarSeries sb{{0.0, 1.0}, {ScalarField::zeros(g), ScalarField::zeros(g)}};
  CHECK(metric_strong(sa, sb) == doctest::Approx(M_PI * std::sqrt(2.0)).epsilon(1e-12));

  auto shifted = b;
  shifted.t[3] += 1e-3;
  CHECK_THROWS_AS(metric_strong(a, shifted), std::invalid_argument);
  auto shorter = b;
  shorter.t.pop_back();
  shorter.f.pop_back();
  CHECK_THROWS_AS(metric_strong(a, shorter), std::invalid_argument);
}

TEST_CASE("metric_weak sees through fast oscillations") {
  const auto g = make_grid(32);
  std::mt19937_64 rng(2);
  const VectorField base{random_field(g, rng, 4), random_field(g, rng, 4)};
  const VectorField F{sin_x1(g), ScalarField::from_function(g, [](double, double y) { return std::cos(2 * y); })};
  const auto windows = standard_windows(1.0);
  const auto ref = constant_series(base, 2000, 1.0);
  CHECK(metric_weak(ref, ref, 8, windows) == 0.0);

  // |int cos(t/eps) w| <= eps TV(w) = 2 eps, and |F_hat| = 1/2
  for (double eps : {0.02, 0.01, 0.005}) {
    VectorSeries osc = ref;
    for (std::size_t k = 0; k < osc.t.size(); ++k) osc.f[k] = base + std::cos(osc.t[k] / eps) * F;
    const double w = metric_weak(osc, ref, 8, windows);
    const double s = metric_strong(osc, ref);
    CHECK(w <= eps * (1.0 + 1e-3));
    CHECK(s > 0.5 * M_PI * std::sqrt(2.0));  // strong metric stays O(1)
  }
}

TEST_CASE("metric_weak is dominated by metric_strong") {
  const auto g = make_grid(32);
  std::mt19937_64 rng(3);
  VectorSeries a, b;
  for (int k = 0; k <= 50; ++k) {
    a.t.push_back(0.02 * k);
    b.t.push_back(0.02 * k);
    a.f.push_back(VectorField{random_field(g, rng, 6), random_field(g, rng, 6)});
    b.f.push_back(VectorField{random_field(g, rng, 6), random_field(g, rng, 6)});
  }
  const auto windows = standard_windows(1.0);
  // |int d_hat w| <= (2 pi)^-1 ||w||_{L^2_t} (int ||d||^2)^{1/2}; ||w||_{L^2} <= sqrt(2T/11)
  const double C = std::sqrt(2.0 / 11.0) / (2.0 * M_PI);
  CHECK(metric_weak(a, b, 8, windows) <= C * metric_strong(a, b) * (1.0 + 1e-9));
}

TEST_CASE("metric_constraint") {
  const auto g = make_grid(64);
  const auto rho0 = zonal_reference_density(g);
  const auto windows = standard_windows(1.0);
  const VectorField shear{ScalarField::from_function(g, [](double, double y) { return std::sin(3 * y); }),
                          ScalarField::zeros(g)};
  CHECK(metric_constraint(constant_series(shear, 10, 1.0), rho0, windows) <= 1e-14);
  CHECK(nonzonal_fraction(constant_series(shear, 10, 1.0), rho0, windows) <= 1e-28);

  // u = grad^perp cos x1 = (0, -sin x1): u.grad rho0 = -sin x1 cos x2, |k|^2 = 2
  const auto wave = perp_gradient(ScalarField::from_function(g, [](double x, double) { return std::cos(x); }));
  CHECK(metric_constraint(constant_series(wave, 10, 1.0), rho0, windows) ==
        doctest::Approx(M_PI / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(nonzonal_fraction(constant_series(wave, 10, 1.0), rho0, windows) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sigma bound and s decay") {
  const auto g = make_grid(32);
  const auto rho0 = zonal_reference_density(g);
  Trajectory rest;
  for (int k = 0; k <= 4; ++k) rest.snapshots.push_back({0.25 * k, rho0, VectorField::zeros(g)});
  CHECK(metric_sigma_bound(sigma_series(rest, rho0, 0.1)) == 0.0);
  CHECK(metric_s_decay(s_series(rest, rho0), 0.1, 0.5) == 0.0);

  const double a = 0.7;
  const auto mode = ScalarField::from_function(g, [](double x, double) { return std::cos(4 * x); });
  ScalarSeries sig{{0.0, 1.0}, {a * mode, 0.5 * a * mode}};
  CHECK(metric_sigma_bound(sig) == doctest::Approx(a * std::pow(17.0, -1.25) * M_PI * std::sqrt(2.0)).epsilon(1e-12));

  // s = eps F: ratio scales as eps^(1 - theta)
  const double theta = 0.25;
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    ScalarSeries s{{0.0}, {eps * mode}};
    const double v = metric_s_decay(s, eps, theta);
    if (prev > 0.0) CHECK(v / prev == doctest::Approx(std::pow(0.5, 1.0 - theta)).epsilon(1e-12));
    prev = v;
  }
}

TEST_CASE("fit_rate") {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  auto f = fit_rate(eps, eps);
  REQUIRE(f.ok);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.residual <= 1e-12);
  f = fit_rate(eps, {3.0, 3.0, 3.0, 3.0});
  REQUIRE(f.ok);
  CHECK(std::abs(f.slope) <= 1e-12);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<double> v;
  for (double e : eps) v.push_back(std::sqrt(e) * (1.0 + noise(rng)));
  f = fit_rate(eps, v);
  REQUIRE(f.ok);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(f.residual > 0.0);

  CHECK_FALSE(fit_rate({0.2, 0.1}, {1.0, 0.5}).ok);
  const auto bad = fit_rate(eps, {1.0, 0.0, 0.5, 0.2});
  CHECK_FALSE(bad.ok);
  CHECK(bad.reason.find("non-positive") != std::string::npos);
}

TEST_CASE("sweep configuration") {
  SweepConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.shared_dt() == doctest::Approx(0.01));
  c.epsilons = {0.1, 0.2};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("decreasing"), std::invalid_argument);
  c.epsilons = {1.5, 0.1};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("(0, 1]"), std::invalid_argument);
  c.epsilons = {0.1};
  c.metrics = std::vector<std::string>{"constraint"};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);  // dens metric on a hom sweep
  c.kind = SweepKind::dens;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("sweep with an empty metric list reports runs only") {
  const auto g = make_grid(32);
  auto c = tiny_sweep(SweepKind::hom);
  c.epsilons = {0.1};
  c.metrics = std::vector<std::string>{};
  const auto rep = run_sweep(c, default_sweep_data(g, SweepKind::hom));
  CHECK_FALSE(rep.partial);
  REQUIRE(rep.runs.size() == 1);
  CHECK(rep.runs[0].final_time == doctest::Approx(0.3));
  CHECK(rep.metrics.empty());
}

TEST_CASE("shear data: limit comparison is flat in epsilon") {
  const auto g = make_grid(32);
  auto c = tiny_sweep(SweepKind::hom);
  const VectorField u0{ScalarField::from_function(g, [](double, double y) { return std::sin(y); }),
                       ScalarField::zeros(g)};
  const auto init = InitialData::make(g, ReferenceDensity::constant, ScalarField::zeros(g), u0);
  const auto rep = run_sweep(c, init);
  REQUIRE(rep.find("strong_u"));
  for (double v : rep.find("strong_u")->values) CHECK(v <= 1e-10);
  for (double v : rep.find("strong_r")->values) CHECK(v <= 1e-10);
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
  const auto g = make_grid(32);
  auto c = tiny_sweep(SweepKind::dens);
  const auto init = default_sweep_data(g, SweepKind::dens);
  std::vector<SweepRun> runs;
  const auto a = run_sweep(c, init, &runs);
  c.threads = 3;
  const auto b = run_sweep(c, init);
  REQUIRE(a.metrics.size() == metric_names(SweepKind::dens).size());
  REQUIRE(runs.size() == 3);
  CHECK(runs[2].epsilon == 0.05);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].name == b.metrics[i].name);
    CHECK(a.metrics[i].values == b.metrics[i].values);
    for (double v : a.metrics[i].values) CHECK(v >= 0.0);
  }
}

TEST_CASE("a failing run yields a partial report") {
  const auto g = make_grid(32);
  auto c = tiny_sweep(SweepKind::hom);
  c.epsilons = {0.2, 0.02};
  c.base.density_floor = 0.9;  // 1 + 0.2 (cos x1 + sin x2) dips to 0.6
  const auto rep = run_sweep(c, default_sweep_data(g, SweepKind::hom));
  CHECK(rep.partial);
  CHECK(rep.error.find("0.2") != std::string::npos);
  CHECK(rep.runs.size() == 1);
  CHECK(rep.metrics.empty());
}
