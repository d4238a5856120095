#include "nsc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsc {

namespace {

template <typename Fn>
ScalarField apply_symbol(const ScalarField& f, Fn&& symbol) {
  ScalarField g = f.to_spectral();
  const Grid& grid = g.grid();
  for (int row = 0; row < grid.n(); ++row)
    for (int col = 0; col < grid.nc(); ++col) g.at_spec(row, col) *= symbol(row, col);
  return g;
}

}  // namespace

ScalarField derivative(const ScalarField& f, Axis axis) {
  const Grid& grid = f.grid();
  if (axis == Axis::x1)
    return apply_symbol(f, [&](int, int col) { return cplx(0.0, grid.k1_odd(col)); });
  return apply_symbol(f, [&](int row, int) { return cplx(0.0, grid.k2_odd(row)); });
}

VectorField gradient(const ScalarField& f) { return {derivative(f, Axis::x1), derivative(f, Axis::x2)}; }

VectorField perp_gradient(const ScalarField& f) { return {-derivative(f, Axis::x2), derivative(f, Axis::x1)}; }

ScalarField divergence(const VectorField& v) { return derivative(v.x, Axis::x1) + derivative(v.y, Axis::x2); }

ScalarField curl(const VectorField& v) { return derivative(v.y, Axis::x1) - derivative(v.x, Axis::x2); }

ScalarField laplacian(const ScalarField& f) {
  const Grid& grid = f.grid();
  return apply_symbol(f, [&](int row, int col) { return cplx(-grid.ksq(row, col), 0.0); });
}

VectorField laplacian(const VectorField& v) { return {laplacian(v.x), laplacian(v.y)}; }

ScalarField inverse_laplacian(const ScalarField& f) {
  ScalarField g = f.to_spectral();
  if (std::abs(g.at_spec(0, 0)) > 1e-12)
    throw std::invalid_argument("inverse_laplacian: input must have zero mean");
  const Grid& grid = g.grid();
  for (int row = 0; row < grid.n(); ++row)
    for (int col = 0; col < grid.nc(); ++col) {
      const double k2 = grid.ksq(row, col);
      g.at_spec(row, col) = k2 > 0.0 ? g.at_spec(row, col) / -k2 : cplx{};
    }
  return g;
}

VectorField biot_savart(const ScalarField& omega) {
  // -(-Lap)^{-1} = Lap^{-1}
  return perp_gradient(inverse_laplacian(omega));
}

VectorField leray_project(const VectorField& v) {
  VectorField w = v.to_spectral();
  const Grid& grid = w.grid();
  for (int row = 0; row < grid.n(); ++row)
    for (int col = 0; col < grid.nc(); ++col) {
      const double a = grid.k1_odd(col), b = grid.k2_odd(row);
      const double k2 = a * a + b * b;
      if (k2 == 0.0) continue;
      cplx& p = w.x.at_spec(row, col);
      cplx& q = w.y.at_spec(row, col);
      const cplx kv = (a * p + b * q) / k2;
      p -= a * kv;
      q -= b * kv;
    }
  return w;
}

ScalarField dealias(const ScalarField& f) {
  if (!f.is_spectral()) throw std::invalid_argument("dealias: spectral input required");
  ScalarField g = f;
  const Grid& grid = g.grid();
  const int n = grid.n();
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < grid.nc(); ++col)
      if (3 * std::max(std::abs(grid.k1(col)), std::abs(grid.k2(row))) > n) g.at_spec(row, col) = 0.0;
  return g;
}

VectorField dealias(const VectorField& v) { return {dealias(v.x), dealias(v.y)}; }

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
  return dealias(multiply(a, b).to_spectral());
}

double sobolev_norm(const ScalarField& f, double s) {
  return std::sqrt(f.grid().area() *
                   spectral_sum(f, [s](int k1, int k2) { return std::pow(1.0 + k1 * k1 + k2 * k2, s); }));
}

double sobolev_norm(const VectorField& v, double s) { return std::hypot(sobolev_norm(v.x, s), sobolev_norm(v.y, s)); }

std::vector<double> zonal_mean(const ScalarField& f) {
  const ScalarField g = f.to_physical();
  const int n = g.grid().n();
  std::vector<double> prof(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g.at(i, j);
    prof[j] = s / n;
  }
  return prof;
}

}  // namespace nsc
