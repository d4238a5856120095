// Shared helpers and independent oracles for the test suites.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nsc/field.hpp"

namespace nsc::testing {

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  const ScalarField pa = a.to_physical(), pb = b.to_physical();
  double m = 0.0;
  for (std::size_t i = 0; i < pa.values().size(); ++i) m = std::max(m, std::abs(pa.values()[i] - pb.values()[i]));
  return m;
}

inline double max_diff(const VectorField& a, const VectorField& b) {
  return std::max(max_diff(a.x, b.x), max_diff(a.y, b.y));
}

inline double max_coeff_diff(const ScalarField& a, const ScalarField& b) {
  const ScalarField sa = a.to_spectral(), sb = b.to_spectral();
  double m = 0.0;
  for (std::size_t i = 0; i < sa.coeffs().size(); ++i) m = std::max(m, std::abs(sa.coeffs()[i] - sb.coeffs()[i]));
  return m;
}

// O(n^4) direct DFT of a physical field; independent of FFTW.
inline cplx naive_coefficient(const ScalarField& f, int k1, int k2) {
  const ScalarField p = f.to_physical();
  const int n = p.grid().n();
  cplx s{};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s += p.at(i, j) * std::polar(1.0, -(k1 * p.grid().x(i) + k2 * p.grid().x(j)));
  return s / static_cast<double>(n * n);
}

// Exact (non-periodic-wrapping) convolution of two band-limited coefficient sets, returned
// as a map over the doubled lattice: the true Fourier coefficients of the product.
struct ModeSet {
  int kmax = 0;
  std::vector<cplx> c;  // (2 kmax + 1)^2, index (k2 + kmax)*(2 kmax+1) + (k1 + kmax)
  cplx get(int k1, int k2) const {
    if (std::abs(k1) > kmax || std::abs(k2) > kmax) return {};
    return c[static_cast<std::size_t>(k2 + kmax) * (2 * kmax + 1) + (k1 + kmax)];
  }
};

inline ModeSet modes_of(const ScalarField& f, int kmax) {
  ModeSet m{kmax, std::vector<cplx>(static_cast<std::size_t>(2 * kmax + 1) * (2 * kmax + 1))};
  for (int k2 = -kmax; k2 <= kmax; ++k2)
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      m.c[static_cast<std::size_t>(k2 + kmax) * (2 * kmax + 1) + (k1 + kmax)] = naive_coefficient(f, k1, k2);
  return m;
}

inline ModeSet direct_convolution(const ModeSet& a, const ModeSet& b) {
  const int K = a.kmax + b.kmax;
  ModeSet out{K, std::vector<cplx>(static_cast<std::size_t>(2 * K + 1) * (2 * K + 1))};
  for (int p2 = -a.kmax; p2 <= a.kmax; ++p2)
    for (int p1 = -a.kmax; p1 <= a.kmax; ++p1) {
      const cplx ca = a.get(p1, p2);
      if (ca == cplx{}) continue;
      for (int q2 = -b.kmax; q2 <= b.kmax; ++q2)
        for (int q1 = -b.kmax; q1 <= b.kmax; ++q1) {
          const int k1 = p1 + q1, k2 = p2 + q2;
          out.c[static_cast<std::size_t>(k2 + K) * (2 * K + 1) + (k1 + K)] += ca * b.get(q1, q2);
        }
    }
  return out;
}

inline double sin1(double x, double) { return std::sin(x); }

}  // namespace nsc::testing
