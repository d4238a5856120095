#include "nsc/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "nsc/operators.hpp"

namespace nsc::lp {

namespace {

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Multiplies every coefficient by symbol(|k|).
ScalarField apply_radial(const ScalarField& u, const std::function<double(double)>& symbol) {
  ScalarField s = u.to_spectral();
  const Grid& g = s.grid();
  for (int row = 0; row < g.n(); ++row)
    for (int col = 0; col < g.nc(); ++col) s.at_spec(row, col) *= symbol(std::sqrt(g.ksq(row, col)));
  return s;
}

}  // namespace

double chi(double r) {
  r = std::abs(r);
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = bump(2.0 - r), b = bump(r - 1.0);
  return a / (a + b);
}

DyadicDecomposition::DyadicDecomposition(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("DyadicDecomposition: null grid");
  j_max_ = 0;
  while ((2 << j_max_) < grid_->n() / 2) ++j_max_;
}

double DyadicDecomposition::block_symbol(int j, double kabs) const {
  if (j < -1 || j > j_max_) throw std::out_of_range("dyadic block index out of range");
  if (j == -1) return chi(kabs);
  const double lower = chi(std::ldexp(kabs, -j));
  if (j == j_max_) return 1.0 - lower;
  return chi(std::ldexp(kabs, -j - 1)) - lower;
}

double DyadicDecomposition::low_pass_symbol(int M, double kabs) const {
  if (M < 0) throw std::out_of_range("low-pass index must be non-negative");
  if (M > j_max_) return 1.0;
  return chi(std::ldexp(kabs, -M));
}

ScalarField DyadicDecomposition::block(const ScalarField& u, int j) const {
  if (j < -1 || j > j_max_) throw std::out_of_range("dyadic block index out of range");
  return apply_radial(u, [&](double k) { return block_symbol(j, k); });
}

ScalarField DyadicDecomposition::low_pass(const ScalarField& u, int M) const {
  if (M < 0) throw std::out_of_range("low-pass index must be non-negative");
  return apply_radial(u, [&](double k) { return low_pass_symbol(M, k); });
}

std::vector<ScalarField> DyadicDecomposition::blocks(const ScalarField& u) const {
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(j_max_ + 2));
  for (int j = -1; j <= j_max_; ++j) out.push_back(block(u, j));
  return out;
}

BesovIndex::BesovIndex(double s_, double p_, double r_) : s(s_), p(p_), r(r_) {
  if (!(p >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("Besov exponents must lie in [1, inf]");
}

SobolevNorms sobolev_norms(const DyadicDecomposition& dec, const ScalarField& u, double s) {
  SobolevNorms out;
  out.direct = sobolev_norm(u, s);
  double acc = 0.0;
  for (int j = -1; j <= dec.j_max(); ++j) {
    const double b = l2_norm(dec.block(u, j));
    acc += std::exp2(2.0 * j * s) * b * b;
  }
  out.lp = std::sqrt(acc);
  return out;
}

double besov_norm(const DyadicDecomposition& dec, const ScalarField& u, const BesovIndex& idx) {
  if (!(idx.p >= 1.0) || !(idx.r >= 1.0)) throw std::invalid_argument("Besov exponents must lie in [1, inf]");
  const bool r_inf = std::isinf(idx.r);
  double acc = 0.0;
  for (int j = -1; j <= dec.j_max(); ++j) {
    const auto b = dec.block(u, j).to_physical();
    const double term = std::exp2(j * idx.s) * lp_norm(b, idx.p);
    if (r_inf)
      acc = std::max(acc, term);
    else
      acc += std::pow(term, idx.r);
  }
  return r_inf ? acc : std::pow(acc, 1.0 / idx.r);
}

namespace {

std::vector<ScalarField> physical_blocks(const DyadicDecomposition& dec, const ScalarField& u) {
  auto b = dec.blocks(u);
  for (auto& f : b) f = f.to_physical();
  return b;
}

}  // namespace

ScalarField paraproduct(const DyadicDecomposition& dec, const ScalarField& u, const ScalarField& v) {
  const auto bu = physical_blocks(dec, u);
  const auto bv = physical_blocks(dec, v);
  auto out = ScalarField::zeros(u.grid_ptr());
  auto low = ScalarField::zeros(u.grid_ptr());  // S_{j-1} u
  // index i = j + 1; S_{j-1} u = sum of blocks with index < i - 1
  for (std::size_t i = 0; i < bv.size(); ++i) {
    if (i >= 2) low += bu[i - 2];
    if (i >= 2) out += multiply(low, bv[i]);
  }
  return out;
}

ScalarField remainder(const DyadicDecomposition& dec, const ScalarField& u, const ScalarField& v) {
  const auto bu = physical_blocks(dec, u);
  const auto bv = physical_blocks(dec, v);
  auto out = ScalarField::zeros(u.grid_ptr());
  const std::size_t m = bu.size();
  for (std::size_t i = 0; i < m; ++i) {
    auto near = bv[i];
    if (i > 0) near += bv[i - 1];
    if (i + 1 < m) near += bv[i + 1];
    out += multiply(bu[i], near);
  }
  return out;
}

ScalarField commutator_low_pass(const DyadicDecomposition& dec, const ScalarField& a, const ScalarField& f, int M) {
  const auto af = multiply(a, f);
  auto out = dec.low_pass(af, M).to_physical();
  out -= multiply(a, dec.low_pass(f, M));
  return out;
}

bool in_bernstein_annulus(int j, double kabs) {
  return kabs >= std::ldexp(1.0, j - 1) - 1e-12 && kabs <= std::ldexp(1.0, j + 1) + 1e-12;
}

BernsteinReport bernstein_check(const ScalarField& u, int j, double constant) {
  const ScalarField s = u.to_spectral();
  const double total = spectral_sum(s, [](int, int) { return 1.0; });
  const double outside = spectral_sum(s, [&](int k1, int k2) {
    return in_bernstein_annulus(j, std::hypot(k1, k2)) ? 0.0 : 1.0;
  });
  if (outside > 1e-24 * std::max(total, 1e-300) && outside > 0.0)
    throw std::invalid_argument("bernstein_check: field not supported in the annulus of block " + std::to_string(j));
  BernsteinReport r;
  r.j = j;
  r.constant = constant;
  const double un = l2_norm(s);
  r.ratio = un > 0.0 ? l2_norm(gradient(s)) / (std::ldexp(1.0, j) * un) : 0.0;
  r.pass = un > 0.0 && r.ratio >= 1.0 / constant && r.ratio <= constant;
  return r;
}

GagliardoNirenbergReport gagliardo_nirenberg_check(const ScalarField& u, double p) {
  if (!(p > 2.0) || std::isinf(p)) throw std::invalid_argument("gagliardo_nirenberg_check: p must lie in (2, inf)");
  const double scale = std::max(l2_norm(u), 1e-300);
  if (std::abs(mean(u)) > 1e-12 * scale) throw std::invalid_argument("gagliardo_nirenberg_check: field must have zero mean");
  GagliardoNirenbergReport r;
  r.p = p;
  r.lambda = (p - 2.0) / p;
  r.lp_norm = lp_norm(u.to_physical(), p);
  r.bound_without_constant = std::pow(l2_norm(u), 1.0 - r.lambda) * std::pow(l2_norm(gradient(u)), r.lambda);
  r.constant = r.bound_without_constant > 0.0 ? r.lp_norm / r.bound_without_constant : 0.0;
  return r;
}

ScalarField shell_balanced_field(GridPtr grid, unsigned long long seed, double kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  auto f = ScalarField::zeros(grid, Representation::spectral);
  const int n = grid->n();
  const int kk = static_cast<int>(std::floor(kmax));
  for (int k2 = -kk; k2 <= kk; ++k2)
    for (int k1 = 0; k1 <= kk; ++k1) {
      if (k1 == 0 && k2 < 0) continue;
      const double r = std::hypot(k1, k2);
      if (r < 1.0 || r > kmax || k1 >= n / 2 || std::abs(k2) >= n / 2) continue;
      f.set_coeff(k1, k2, std::polar(1.0 / r, phase(rng)));
    }
  // enforce exact Hermitian consistency on the k1 = 0 column
  f = f.to_physical().to_spectral();
  return f * (1.0 / l2_norm(f));
}

double log2_slope(const std::vector<int>& M, const std::vector<double>& values) {
  if (M.size() != values.size() || M.size() < 2) throw std::invalid_argument("log2_slope: need matching samples");
  const double n = static_cast<double>(M.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double x = M[i], y = std::log2(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

void add(std::vector<PropertyRow>& rows, std::string prop, int n, std::string param, double measured, double bound,
         bool pass) {
  rows.push_back({std::move(prop), n, std::move(param), measured, bound, pass});
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

std::vector<PropertyRow> run_property_suite(const std::vector<int>& sizes, unsigned long long seed) {
  using C = FrozenConstants;
  std::vector<PropertyRow> rows;
  constexpr int corpus = 6;
  for (int n : sizes) {
    auto g = make_grid(n);
    DyadicDecomposition dec(g);
    std::mt19937_64 rng(seed + static_cast<unsigned long long>(n));
    std::vector<ScalarField> fields;
    for (int c = 0; c < corpus; ++c) fields.push_back(random_field(g, rng, n / 2.0 - 1.0, c % 3 == 0 ? 0.0 : 1.0 + c % 3));

    double recon = 0.0, bony = 0.0;
    for (const auto& f : fields) {
      auto sum = ScalarField::zeros(g, Representation::spectral);
      for (const auto& b : dec.blocks(f)) sum += b;
      double e = 0.0;
      for (std::size_t i = 0; i < sum.coeffs().size(); ++i) e = std::max(e, std::abs(sum.coeffs()[i] - f.coeffs()[i]));
      recon = std::max(recon, e);
    }
    for (int c = 0; c + 1 < corpus; c += 2) {
      const auto& u = fields[c];
      const auto& v = fields[c + 1];
      auto lhs = paraproduct(dec, u, v) + paraproduct(dec, v, u) + remainder(dec, u, v);
      bony = std::max(bony, max_abs(lhs - multiply(u, v)));
    }
    add(rows, "partition_of_unity", n, "-", recon, 1e-12, recon <= 1e-12);
    add(rows, "bony_identity", n, "-", bony, 1e-12, bony <= 1e-12);

    for (double s : {-1.0, 0.0, 0.5, 1.0}) {
      double worst = 1.0;
      for (const auto& f : fields) {
        const auto nn = sobolev_norms(dec, f, s);
        const double q = nn.lp / nn.direct;
        worst = std::max({worst, q, 1.0 / q});
      }
      add(rows, "sobolev_equivalence", n, "s=" + fmt(s), worst, C::sobolev_equivalence, worst <= C::sobolev_equivalence);
    }

    {
      double worst = 0.0;
      for (int c = 0; c + 1 < corpus; c += 2) {
        const auto& u = fields[c];
        const auto& v = fields[c + 1];
        for (double s : {0.0, 1.0}) {
          const double q = sobolev_norm(paraproduct(dec, u, v), s) / (max_abs(u) * sobolev_norm(v, s));
          worst = std::max(worst, q);
        }
      }
      add(rows, "paraproduct_continuity", n, "s=0,1", worst, C::paraproduct_hs, worst <= C::paraproduct_hs);
    }

    {
      double w3 = 0.0, w5 = 0.0;
      const double eta = 0.5, delta = 0.5;
      for (int c = 0; c + 1 < corpus; c += 2) {
        const auto& a = fields[c];
        const auto& b = fields[c + 1];
        const auto ab = multiply(a, b);
        w3 = std::max(w3, l2_norm(ab) / (sobolev_norm(a, eta) * sobolev_norm(b, 1.0)));
        w5 = std::max(w5, sobolev_norm(ab, 1.0 - delta) / (sobolev_norm(a, 1.0) * sobolev_norm(b, 1.0)));
      }
      add(rows, "product_case_iii", n, "eta=0.5", w3, C::product_case_iii, w3 <= C::product_case_iii);
      add(rows, "product_case_v", n, "delta=0.5", w5, C::product_case_v, w5 <= C::product_case_v);
    }

    {
      double worst = 0.0;
      for (const auto& f : fields) {
        const auto r = gagliardo_nirenberg_check(f, 4.0);
        worst = std::max(worst, r.constant);
      }
      add(rows, "gagliardo_nirenberg", n, "p=4", worst, C::gagliardo_nirenberg_p4, worst <= C::gagliardo_nirenberg_p4);
    }

    {
      double worst = 0.0;
      for (int j = 1; j <= dec.j_max() - 1; ++j) {
        auto f = ScalarField::zeros(g, Representation::spectral);
        std::uniform_real_distribution<double> U(-1, 1);
        for (int k2 = -(2 << j); k2 <= (2 << j); ++k2)
          for (int k1 = 0; k1 <= (2 << j); ++k1) {
            if (k1 == 0 && k2 < 0) continue;
            const double r = std::hypot(k1, k2);
            if (in_bernstein_annulus(j, r) && k1 < n / 2 && std::abs(k2) < n / 2) f.set_coeff(k1, k2, cplx(U(rng), U(rng)));
          }
        f = f.to_physical().to_spectral();
        const auto rep = bernstein_check(f, j);
        worst = std::max({worst, rep.ratio, 1.0 / rep.ratio});
      }
      add(rows, "bernstein", n, "annulus", worst, 2.0, worst <= 2.0);
    }

    {
      double worst = 0.0;
      for (const auto& f : fields) {
        const double lo = besov_norm(dec, f, {0.0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});
        const double hi = besov_norm(dec, f, {1.0, 2.0, std::numeric_limits<double>::infinity()});
        worst = std::max(worst, lo / hi);
      }
      add(rows, "embedding_2_to_inf", n, "s=1", worst, C::embedding_2_to_inf, worst <= C::embedding_2_to_inf);
      double mono = 0.0;
      for (const auto& f : fields) {
        const double r1 = besov_norm(dec, f, {0.5, 2.0, 1.0});
        const double r2 = besov_norm(dec, f, {0.5, 2.0, 2.0});
        const double ri = besov_norm(dec, f, {0.5, 2.0, std::numeric_limits<double>::infinity()});
        mono = std::max({mono, r2 / r1, ri / r2});
      }
      add(rows, "summation_monotonicity", n, "s=0.5,p=2", mono, 1.0, mono <= 1.0 + 1e-14);
    }

    {
      // tail of the low-pass approximation shrinks with M and vanishes past the top block
      const auto& f = fields[1];
      double prev = std::numeric_limits<double>::infinity();
      bool monotone = true;
      double last = 0.0;
      for (int M = 0; M <= dec.j_max() + 1; ++M) {
        last = sobolev_norm(f - dec.low_pass(f, M), 0.5);
        monotone = monotone && last <= prev + 1e-14;
        prev = last;
      }
      add(rows, "low_pass_tail", n, "s=0.5", last, 1e-12, monotone && last <= 1e-12);
    }
  }

  // commutator decay on the finest grid requested, at least 256
  {
    const int n = std::max(256, *std::max_element(sizes.begin(), sizes.end()));
    auto g = make_grid(n);
    DyadicDecomposition dec(g);
    const auto a = ScalarField::from_function(g, [](double, double y) { return 2.0 + std::sin(y); });
    const auto f = shell_balanced_field(g, seed, n / 2.0 - 1.0);
    std::vector<int> Ms;
    std::vector<double> vals;
    for (int M = 2; M <= 6; ++M) {
      Ms.push_back(M);
      vals.push_back(l2_norm(commutator_low_pass(dec, a, f, M)));
    }
    const double slope = log2_slope(Ms, vals);
    add(rows, "commutator_slope", n, "M=2..6", slope, -1.0, std::abs(slope + 1.0) <= C::commutator_slope_tol);
  }
  return rows;
}

}  // namespace nsc::lp
