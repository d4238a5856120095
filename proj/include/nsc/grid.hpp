// grid.hpp
// Periodic n x n grid on [0, 2pi)^2 with a real-to-complex FFT pair.
//
// Layout conventions used everywhere in the library:
//   physical   index  j*n + i   <->  (x1, x2) = (i h, j h),  h = 2pi/n
//   spectral   index  row*(n/2+1) + col  with  k1 = col in [0, n/2],
//              k2 = row for row <= n/2, row - n otherwise.
// Spectral arrays hold normalized Fourier coefficients
//   u_hat(k) = n^-2 sum_x u(x) e^{-i k.x},
// so a constant field c has u_hat(0,0) = c and sin(x1) has -i/2 at k = (1,0).
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace nsc {

using cplx = std::complex<double>;

enum class Axis { x1 = 0, x2 = 1 };

class Grid {
 public:
  explicit Grid(int n);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n() const { return n_; }
  int nc() const { return n_ / 2 + 1; }
  double h() const { return h_; }
  double length() const;
  double area() const;
  std::size_t physical_size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * nc(); }

  int k1(int col) const { return col; }
  int k2(int row) const { return row <= n_ / 2 ? row : row - n_; }
  double x(int i) const { return h_ * i; }

  // Wavenumber with the Nyquist component zeroed; used by first-order operators.
  double k1_odd(int col) const { return col == n_ / 2 ? 0.0 : static_cast<double>(col); }
  double k2_odd(int row) const { return row == n_ / 2 ? 0.0 : static_cast<double>(k2(row)); }
  double ksq(int row, int col) const {
    const double a = k1(col), b = k2(row);
    return a * a + b * b;
  }

  // Spectral row/col holding wavenumber (k1, k2); returns false if k1 < 0 or out of range.
  bool locate(int k1, int k2, int& row, int& col) const;

  // Forward transform, normalized by n^-2. Thread-safe.
  void forward(std::span<const double> in, std::span<cplx> out) const;
  // Inverse transform (unnormalized sum). Thread-safe; input is left untouched.
  void inverse(std::span<const cplx> in, std::span<double> out) const;

 private:
  int n_;
  double h_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Grids are cached per n; plans are built once under a lock.
GridPtr make_grid(int n);

}  // namespace nsc
