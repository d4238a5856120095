#include <doctest.h>

#include <cmath>
#include <random>

#include "nsc/operators.hpp"
#include "test_util.hpp"

using namespace nsc;
using nsc::testing::max_coeff_diff;
using nsc::testing::max_diff;

TEST_CASE("grid rejects invalid sizes") {
  CHECK_THROWS_AS(Grid(8), std::invalid_argument);
  CHECK_THROWS_AS(Grid(48), std::invalid_argument);
  CHECK_NOTHROW(Grid(16));
  CHECK(make_grid(32) == make_grid(32));
}

TEST_CASE("transforms: single modes") {
  auto g = make_grid(32);
  const auto c = ScalarField::constant(g, 2.5).to_spectral();
  CHECK(c.coeff(0, 0).real() == doctest::Approx(2.5).epsilon(1e-15));
  double rest = 0.0;
  for (std::size_t i = 1; i < c.coeffs().size(); ++i) rest = std::max(rest, std::abs(c.coeffs()[i]));
  CHECK(rest < 1e-15);

  const auto s = ScalarField::from_function(g, [](double x, double) { return std::sin(x); }).to_spectral();
  CHECK(std::abs(s.coeff(1, 0) - cplx(0, -0.5)) < 1e-15);
  CHECK(std::abs(s.coeff(-1, 0) - cplx(0, 0.5)) < 1e-15);
  CHECK(std::abs(s.coeff(0, 1)) < 1e-15);
  CHECK(std::abs(s.coeff(2, 0)) < 1e-15);
}

TEST_CASE("transforms agree with a direct DFT") {
  auto g = make_grid(16);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  auto f = ScalarField::zeros(g);
  for (auto& v : f.values()) v = U(rng);
  const auto s = f.to_spectral();
  double err = 0.0;
  for (int k2 = -7; k2 <= 8; ++k2)
    for (int k1 = -7; k1 <= 8; ++k1) err = std::max(err, std::abs(s.coeff(k1, k2) - testing::naive_coefficient(f, k1, k2)));
  CHECK(err < 1e-14);
}

TEST_CASE("round trip and Parseval") {
  for (int n : {64, 128}) {
    auto g = make_grid(n);
    std::mt19937_64 rng(11 + n);
    const auto f = random_field(g, rng, n / 4.0);
    const auto back = f.to_physical().to_spectral().to_physical();
    CHECK(max_diff(back, f.to_physical()) <= 1e-12 * max_abs(f));
    const double phys = l2_norm(f.to_physical());
    const double spec = spectral_l2_norm(f);
    CHECK(std::abs(phys - spec) <= 1e-12 * spec);
  }
}

TEST_CASE("differential operators on single modes") {
  auto g = make_grid(32);
  VectorField u{ScalarField::zeros(g), ScalarField::from_function(g, [](double x, double) { return std::sin(x); })};
  const auto cosx = ScalarField::from_function(g, [](double x, double) { return std::cos(x); });
  CHECK(max_diff(curl(u), cosx) < 1e-13);

  const auto cosy = ScalarField::from_function(g, [](double, double y) { return std::cos(y); });
  const auto pg = perp_gradient(cosy);
  CHECK(max_diff(pg.x, ScalarField::from_function(g, [](double, double y) { return std::sin(y); })) < 1e-13);
  CHECK(max_abs(pg.y) < 1e-13);

  std::mt19937_64 rng(3);
  const auto psi = random_field(g, rng, 12);
  CHECK(l2_norm(divergence(perp_gradient(psi))) < 1e-12);
}

TEST_CASE("derivatives commute") {
  auto g = make_grid(64);
  std::mt19937_64 rng(5);
  const auto f = random_field(g, rng, 20);
  const auto a = derivative(derivative(f, Axis::x1), Axis::x2);
  const auto b = derivative(derivative(f, Axis::x2), Axis::x1);
  CHECK(max_coeff_diff(a, b) < 1e-15);
  CHECK(max_coeff_diff(laplacian(derivative(f, Axis::x1)), derivative(laplacian(f), Axis::x1)) < 1e-13);
}

TEST_CASE("Nyquist column is zeroed by first derivatives") {
  auto g = make_grid(16);
  auto f = ScalarField::zeros(g, Representation::spectral);
  f.set_coeff(8, 2, 1.0);
  auto h = ScalarField::zeros(g, Representation::spectral);
  h.set_coeff(3, 8, 0.5);
  CHECK(l2_norm(derivative(f, Axis::x1)) == 0.0);
  CHECK(l2_norm(derivative(h, Axis::x2)) == 0.0);
  CHECK(l2_norm(derivative(h, Axis::x1)) > 0.0);
  // real-valued output for a random field with Nyquist content
  std::mt19937_64 rng(9);
  const auto r = random_field(g, rng, 12);
  const auto d = derivative(r, Axis::x1);
  CHECK(max_coeff_diff(d, d.to_physical().to_spectral()) < 1e-14);
}

TEST_CASE("inverse Laplacian") {
  auto g = make_grid(64);
  const auto cosx = ScalarField::from_function(g, [](double x, double) { return std::cos(x); });
  CHECK(max_diff(inverse_laplacian(cosx), -cosx) < 1e-14);
  CHECK(l2_norm(inverse_laplacian(ScalarField::zeros(g))) == 0.0);
  std::mt19937_64 rng(17);
  const auto f = random_field(g, rng, 20);
  const auto sol = inverse_laplacian(f);
  CHECK(max_diff(laplacian(sol), f) < 1e-10);
  CHECK(std::abs(mean(sol)) < 1e-15);
  CHECK_THROWS_AS(inverse_laplacian(f + ScalarField::constant(g, 0.1).to_spectral()), std::invalid_argument);
}

TEST_CASE("Biot-Savart") {
  auto g = make_grid(64);
  const auto cosx = ScalarField::from_function(g, [](double x, double) { return std::cos(x); });
  const auto u = biot_savart(cosx);
  CHECK(max_abs(u.x) < 1e-14);
  CHECK(max_diff(u.y, ScalarField::from_function(g, [](double x, double) { return std::sin(x); })) < 1e-14);
  CHECK(l2_norm(biot_savart(ScalarField::zeros(g))) == 0.0);

  for (int n : {64, 128}) {
    auto gn = make_grid(n);
    std::mt19937_64 rng(23 + n);
    const auto w = random_field(gn, rng, n / 3.0 - 1);
    const auto v = biot_savart(w);
    CHECK(l2_norm(curl(v) - w) <= 1e-10);
    CHECK(l2_norm(divergence(v)) <= 1e-10);
    CHECK(std::abs(mean(v.x)) + std::abs(mean(v.y)) < 1e-15);
  }
  CHECK_THROWS_AS(biot_savart(ScalarField::constant(g, 1.0)), std::invalid_argument);
}

TEST_CASE("Leray projection") {
  auto g = make_grid(64);
  const auto phi = ScalarField::from_function(g, [](double x, double y) { return std::cos(x) + std::sin(y); });
  CHECK(l2_norm(leray_project(gradient(phi))) < 1e-13);

  std::mt19937_64 rng(29);
  const auto df = perp_gradient(random_field(g, rng, 15));
  CHECK(max_diff(leray_project(df), df) < 1e-12);

  // (sin x2 + d1 phi, d2 phi) -> (sin x2, 0)
  const auto rphi = random_field(g, rng, 15);
  const auto grad = gradient(rphi);
  const auto siny = ScalarField::from_function(g, [](double, double y) { return std::sin(y); }).to_spectral();
  VectorField v{siny + grad.x, grad.y};
  const auto p = leray_project(v);
  CHECK(max_diff(p.x, siny) < 1e-12);
  CHECK(max_abs(p.y) < 1e-12);

  for (int n : {64, 128}) {
    auto gn = make_grid(n);
    std::mt19937_64 r2(31 + n);
    VectorField w{random_field(gn, r2, n / 4.0), random_field(gn, r2, n / 4.0)};
    const auto p1 = leray_project(w);
    const auto p2 = leray_project(p1);
    CHECK(max_coeff_diff(p1.x, p2.x) < 1e-15);
    CHECK(max_coeff_diff(p1.y, p2.y) < 1e-15);
    CHECK(l2_norm(divergence(p1)) <= 1e-10);
  }
}

TEST_CASE("dealiasing") {
  auto g = make_grid(64);
  const auto low = ScalarField::from_function(g, [](double x, double y) { return std::cos(2 * x) + std::sin(x + y); });
  CHECK(max_coeff_diff(dealias(low.to_spectral()), low) < 1e-16);

  auto nyq = ScalarField::zeros(g, Representation::spectral);
  nyq.set_coeff(32, 1, cplx(1.0, 0.5));
  nyq.set_coeff(3, 0, 1.0);
  const auto d = dealias(nyq);
  CHECK(std::abs(d.coeff(32, 1)) == 0.0);
  CHECK(std::abs(d.coeff(3, 0) - 1.0) < 1e-16);
  CHECK_THROWS_AS(dealias(low), std::invalid_argument);
}

TEST_CASE("dealiased product matches direct convolution on a small grid") {
  // n = 16: modes above n/3 alias back into the retained band when multiplied on the grid.
  auto g = make_grid(16);
  const int m = 16 / 3 + 1;  // 6
  const auto s = ScalarField::from_function(g, [m](double x, double) { return std::sin(m * x); });
  // exact product sin^2 = 1/2 - cos(2 m x)/2: only k = 0 and |k1| = 12 (outside the grid)
  const auto oracle = testing::direct_convolution(testing::modes_of(s, 8), testing::modes_of(s, 8));
  CHECK(std::abs(oracle.get(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(oracle.get(16 - 2 * m, 0)) < 1e-14);
  // the grid product aliases -cos(12 x)/2 onto k1 = 4, inside the retained band
  const auto raw = multiply(s, s).to_spectral();
  CHECK(std::abs(raw.coeff(16 - 2 * m, 0) + 0.25) < 1e-14);
  // with inputs truncated to the 2/3 band the grid product equals the truncated exact product
  std::mt19937_64 rng(41);
  const auto a = dealias(random_field(g, rng, 6));
  const auto b = dealias(random_field(g, rng, 6));
  const auto ab = dealiased_product(a, b);
  const auto exact = testing::direct_convolution(testing::modes_of(a, 5), testing::modes_of(b, 5));
  double err = 0.0;
  for (int k2 = -5; k2 <= 5; ++k2)
    for (int k1 = -5; k1 <= 5; ++k1) err = std::max(err, std::abs(ab.coeff(k1, k2) - exact.get(k1, k2)));
  CHECK(err < 1e-14);
}

TEST_CASE("Sobolev norm of a single mode") {
  auto g = make_grid(32);
  const auto f = ScalarField::from_function(g, [](double x, double) { return std::sin(4 * x); });
  CHECK(sobolev_norm(f, 1.0) == doctest::Approx(std::sqrt(17.0) * l2_norm(f)).epsilon(1e-13));
  CHECK(sobolev_norm(f, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-13));
}
