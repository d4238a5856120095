// field.hpp
// Scalar and vector fields on the periodic grid, held either as point values
// or as normalized Fourier coefficients (see grid.hpp for the layout).
#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "nsc/grid.hpp"

namespace nsc {

enum class Representation { physical, spectral };

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, Representation rep);

  static ScalarField zeros(GridPtr grid, Representation rep = Representation::physical);
  static ScalarField constant(GridPtr grid, double c);
  static ScalarField from_function(GridPtr grid, const std::function<double(double, double)>& f);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  Representation representation() const { return rep_; }
  bool is_spectral() const { return rep_ == Representation::spectral; }
  bool empty() const { return !grid_; }

  std::span<double> values();
  std::span<const double> values() const;
  std::span<cplx> coeffs();
  std::span<const cplx> coeffs() const;

  double& at(int i, int j);        // physical: x1 index i, x2 index j
  double at(int i, int j) const;
  cplx& at_spec(int row, int col);  // spectral storage cell
  cplx at_spec(int row, int col) const;

  // Coefficient of wavenumber (k1, k2), using Hermitian symmetry for k1 < 0.
  cplx coeff(int k1, int k2) const;
  // Sets the coefficient of (k1, k2) and, where the storage needs it, its conjugate partner.
  void set_coeff(int k1, int k2, cplx c);

  ScalarField to_spectral() const;
  ScalarField to_physical() const;
  ScalarField as(Representation rep) const;

  // Arithmetic keeps the representation of the left operand, converting the right one if needed.
  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  ScalarField operator-() const { return (*this) * -1.0; }

 private:
  void check_compatible(const ScalarField& o) const;

  GridPtr grid_;
  Representation rep_ = Representation::physical;
  std::vector<double> phys_;
  std::vector<cplx> spec_;
};

struct VectorField {
  ScalarField x;
  ScalarField y;

  static VectorField zeros(GridPtr grid, Representation rep = Representation::physical);
  const Grid& grid() const { return x.grid(); }
  const GridPtr& grid_ptr() const { return x.grid_ptr(); }
  Representation representation() const { return x.representation(); }

  VectorField to_spectral() const { return {x.to_spectral(), y.to_spectral()}; }
  VectorField to_physical() const { return {x.to_physical(), y.to_physical()}; }
  VectorField as(Representation rep) const { return {x.as(rep), y.as(rep)}; }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(VectorField a, double s) { return a *= s; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

// v^perp = (-v2, v1)
VectorField perp(const VectorField& v);

// Pointwise product in physical space; no dealiasing (exact circular convolution of the
// grid coefficients). Result is physical.
ScalarField multiply(const ScalarField& a, const ScalarField& b);
ScalarField multiply(const ScalarField& a, const ScalarField& b, const ScalarField& c);

// Integrals and norms use the torus measure dx on [0,2pi)^2.
double integral(const ScalarField& f);
double mean(const ScalarField& f);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
double lp_norm(const ScalarField& f, double p);  // p = inf allowed
double max_abs(const ScalarField& f);
double max_abs(const VectorField& v);  // max pointwise |v|
double min_value(const ScalarField& f);
double max_value(const ScalarField& f);
// Spectral l2 norm: sqrt(area * sum |u_hat|^2) over the full (Hermitian) lattice.
double spectral_l2_norm(const ScalarField& f);

// Band-limited random field: Gaussian coefficients for 1 <= |k| <= kmax, amplitude
// scaled by (1+|k|^2)^(-decay/2), zero mean, normalized to unit L2 norm. Spectral result.
ScalarField random_field(GridPtr grid, std::mt19937_64& rng, double kmax, double decay = 1.0);

// Sum over the full Hermitian lattice of w(k1,k2) |u_hat(k)|^2, visiting each stored cell
// with the multiplicity of its conjugate partner.
double spectral_sum(const ScalarField& f, const std::function<double(int, int)>& weight);

}  // namespace nsc
