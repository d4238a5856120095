#include "nsc/grid.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsc {

namespace {
// The FFTW planner is not re-entrant; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Grid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

Grid::Grid(int n) : n_(n), h_(2.0 * std::numbers::pi / n), plans_(std::make_unique<Plans>()) {
  if (n < 16 || n % 2 != 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("grid size must be a power of two >= 16, got " + std::to_string(n));

  std::vector<double> rbuf(physical_size());
  auto* cbuf = fftw_alloc_complex(spectral_size());
  {
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->r2c = fftw_plan_dft_r2c_2d(n, n, rbuf.data(), cbuf, flags);
    plans_->c2r = fftw_plan_dft_c2r_2d(n, n, cbuf, rbuf.data(), flags | FFTW_DESTROY_INPUT);
  }
  fftw_free(cbuf);
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("FFTW planning failed");
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->r2c);
  fftw_destroy_plan(plans_->c2r);
}

double Grid::length() const { return 2.0 * std::numbers::pi; }
double Grid::area() const { return length() * length(); }

bool Grid::locate(int kk1, int kk2, int& row, int& col) const {
  if (kk1 < 0 || kk1 > n_ / 2) return false;
  if (kk2 <= -n_ / 2 || kk2 > n_ / 2) return false;
  col = kk1;
  row = kk2 >= 0 ? kk2 : kk2 + n_;
  return true;
}

void Grid::forward(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != physical_size() || out.size() != spectral_size())
    throw std::invalid_argument("Grid::forward: size mismatch");
  // r2c does not modify its input
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(physical_size());
  for (auto& c : out) c *= scale;
}

void Grid::inverse(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != spectral_size() || out.size() != physical_size())
    throw std::invalid_argument("Grid::inverse: size mismatch");
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

GridPtr make_grid(int n) {
  static std::mutex cache_mutex;
  static std::map<int, std::weak_ptr<const Grid>> cache;
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(n); it != cache.end())
    if (auto g = it->second.lock()) return g;
  auto g = std::make_shared<const Grid>(n);
  cache[n] = g;
  return g;
}

}  // namespace nsc
