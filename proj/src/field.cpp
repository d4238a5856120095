#include "nsc/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsc {

namespace {
int wrap(int k, int n) {
  k %= n;
  if (k <= -n / 2) k += n;
  if (k > n / 2) k -= n;
  return k;
}
}  // namespace

ScalarField::ScalarField(GridPtr grid, Representation rep) : grid_(std::move(grid)), rep_(rep) {
  if (!grid_) throw std::invalid_argument("ScalarField: null grid");
  if (rep_ == Representation::physical)
    phys_.assign(grid_->physical_size(), 0.0);
  else
    spec_.assign(grid_->spectral_size(), cplx{});
}

ScalarField ScalarField::zeros(GridPtr grid, Representation rep) { return ScalarField(std::move(grid), rep); }

ScalarField ScalarField::constant(GridPtr grid, double c) {
  ScalarField f(std::move(grid), Representation::physical);
  std::fill(f.phys_.begin(), f.phys_.end(), c);
  return f;
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(double, double)>& fn) {
  ScalarField f(std::move(grid), Representation::physical);
  const int n = f.grid().n();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) f.phys_[static_cast<std::size_t>(j) * n + i] = fn(f.grid().x(i), f.grid().x(j));
  return f;
}

std::span<double> ScalarField::values() {
  if (rep_ != Representation::physical) throw std::logic_error("field is not in physical representation");
  return phys_;
}
std::span<const double> ScalarField::values() const {
  if (rep_ != Representation::physical) throw std::logic_error("field is not in physical representation");
  return phys_;
}
std::span<cplx> ScalarField::coeffs() {
  if (rep_ != Representation::spectral) throw std::logic_error("field is not in spectral representation");
  return spec_;
}
std::span<const cplx> ScalarField::coeffs() const {
  if (rep_ != Representation::spectral) throw std::logic_error("field is not in spectral representation");
  return spec_;
}

double& ScalarField::at(int i, int j) { return values()[static_cast<std::size_t>(j) * grid_->n() + i]; }
double ScalarField::at(int i, int j) const { return values()[static_cast<std::size_t>(j) * grid_->n() + i]; }
cplx& ScalarField::at_spec(int row, int col) { return coeffs()[static_cast<std::size_t>(row) * grid_->nc() + col]; }
cplx ScalarField::at_spec(int row, int col) const {
  return coeffs()[static_cast<std::size_t>(row) * grid_->nc() + col];
}

cplx ScalarField::coeff(int k1, int k2) const {
  const int n = grid_->n();
  k1 = wrap(k1, n);
  k2 = wrap(k2, n);
  bool conj = false;
  if (k1 < 0) {
    k1 = -k1;
    k2 = wrap(-k2, n);
    conj = true;
  }
  int row = 0, col = 0;
  grid_->locate(k1, k2, row, col);
  const cplx c = at_spec(row, col);
  return conj ? std::conj(c) : c;
}

void ScalarField::set_coeff(int k1, int k2, cplx c) {
  const int n = grid_->n();
  k1 = wrap(k1, n);
  k2 = wrap(k2, n);
  if (k1 < 0) {
    k1 = -k1;
    k2 = wrap(-k2, n);
    c = std::conj(c);
  }
  int row = 0, col = 0;
  grid_->locate(k1, k2, row, col);
  at_spec(row, col) = c;
  if (col == 0 || col == n / 2) {
    int prow = 0, pcol = 0;
    grid_->locate(k1, wrap(-k2, n), prow, pcol);
    if (prow == row)
      at_spec(row, col) = cplx(c.real(), 0.0);  // self-conjugate cell
    else
      at_spec(prow, pcol) = std::conj(c);
  }
}

ScalarField ScalarField::to_spectral() const {
  if (rep_ == Representation::spectral) return *this;
  ScalarField out(grid_, Representation::spectral);
  grid_->forward(phys_, out.spec_);
  return out;
}

ScalarField ScalarField::to_physical() const {
  if (rep_ == Representation::physical) return *this;
  ScalarField out(grid_, Representation::physical);
  grid_->inverse(spec_, out.phys_);
  return out;
}

ScalarField ScalarField::as(Representation rep) const {
  return rep == Representation::spectral ? to_spectral() : to_physical();
}

void ScalarField::check_compatible(const ScalarField& o) const {
  if (grid_ != o.grid_) throw std::invalid_argument("fields live on different grids");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  check_compatible(other);
  const ScalarField converted = other.rep_ == rep_ ? ScalarField{} : other.as(rep_);
  const ScalarField& o = other.rep_ == rep_ ? other : converted;
  if (rep_ == Representation::physical)
    for (std::size_t i = 0; i < phys_.size(); ++i) phys_[i] += o.phys_[i];
  else
    for (std::size_t i = 0; i < spec_.size(); ++i) spec_[i] += o.spec_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  check_compatible(other);
  const ScalarField converted = other.rep_ == rep_ ? ScalarField{} : other.as(rep_);
  const ScalarField& o = other.rep_ == rep_ ? other : converted;
  if (rep_ == Representation::physical)
    for (std::size_t i = 0; i < phys_.size(); ++i) phys_[i] -= o.phys_[i];
  else
    for (std::size_t i = 0; i < spec_.size(); ++i) spec_[i] -= o.spec_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : phys_) v *= s;
  for (auto& c : spec_) c *= s;
  return *this;
}

VectorField VectorField::zeros(GridPtr grid, Representation rep) {
  return {ScalarField(grid, rep), ScalarField(grid, rep)};
}

VectorField& VectorField::operator+=(const VectorField& o) {
  x += o.x;
  y += o.y;
  return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
  x -= o.x;
  y -= o.y;
  return *this;
}
VectorField& VectorField::operator*=(double s) {
  x *= s;
  y *= s;
  return *this;
}

VectorField perp(const VectorField& v) { return {-v.y, v.x}; }

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw std::invalid_argument("multiply: grid mismatch");
  ScalarField pa = a.to_physical();
  const ScalarField pb = b.to_physical();
  auto va = pa.values();
  auto vb = pb.values();
  for (std::size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
  return pa;
}

ScalarField multiply(const ScalarField& a, const ScalarField& b, const ScalarField& c) {
  return multiply(multiply(a, b), c);
}

double integral(const ScalarField& f) {
  if (f.is_spectral()) return f.coeff(0, 0).real() * f.grid().area();
  double s = 0.0;
  for (double v : f.values()) s += v;
  const double h = f.grid().h();
  return s * h * h;
}

double mean(const ScalarField& f) { return integral(f) / f.grid().area(); }

double inner(const ScalarField& a, const ScalarField& b) { return integral(multiply(a, b)); }
double inner(const VectorField& a, const VectorField& b) { return inner(a.x, b.x) + inner(a.y, b.y); }

double lp_norm(const ScalarField& f, double p) {
  const ScalarField g = f.to_physical();
  const auto v = g.values();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  const double h = f.grid().h();
  return std::pow(s * h * h, 1.0 / p);
}

double l2_norm(const ScalarField& f) {
  if (f.is_spectral()) return spectral_l2_norm(f);
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  const double h = f.grid().h();
  return std::sqrt(s * h * h);
}

double l2_norm(const VectorField& v) { return std::hypot(l2_norm(v.x), l2_norm(v.y)); }

double max_abs(const ScalarField& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

double max_abs(const VectorField& v) {
  const ScalarField a = v.x.to_physical(), b = v.y.to_physical();
  const auto va = a.values(), vb = b.values();
  double m = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::hypot(va[i], vb[i]));
  return m;
}

double min_value(const ScalarField& f) {
  const ScalarField g = f.to_physical();
  return *std::min_element(g.values().begin(), g.values().end());
}

double max_value(const ScalarField& f) {
  const ScalarField g = f.to_physical();
  return *std::max_element(g.values().begin(), g.values().end());
}

double spectral_sum(const ScalarField& f, const std::function<double(int, int)>& weight) {
  const ScalarField g = f.to_spectral();
  const Grid& grid = g.grid();
  const int n = grid.n(), nc = grid.nc();
  double s = 0.0;
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < nc; ++col) {
      const double mult = (col == 0 || col == n / 2) ? 1.0 : 2.0;
      s += mult * weight(grid.k1(col), grid.k2(row)) * std::norm(g.at_spec(row, col));
    }
  return s;
}

double spectral_l2_norm(const ScalarField& f) {
  return std::sqrt(f.grid().area() * spectral_sum(f, [](int, int) { return 1.0; }));
}

ScalarField random_field(GridPtr grid, std::mt19937_64& rng, double kmax, double decay) {
  ScalarField f(grid, Representation::spectral);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = grid->n();
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < grid->nc(); ++col) {
      const double k2 = grid->ksq(row, col);
      const double re = gauss(rng), im = gauss(rng);
      if (k2 < 0.5 || k2 > kmax * kmax) continue;
      f.at_spec(row, col) = cplx(re, im) * std::pow(1.0 + k2, -0.5 * decay);
    }
  // Round trip restores exact Hermitian symmetry on the k1 = 0 and Nyquist columns.
  f = f.to_physical().to_spectral();
  f.at_spec(0, 0) = 0.0;
  const double nrm = l2_norm(f);
  if (nrm > 0.0) f *= 1.0 / nrm;
  return f;
}

}  // namespace nsc
