// littlewood_paley.hpp
// Dyadic decomposition of periodic fields, Besov/Sobolev norms, Bony's paraproduct and
// the commutator / Bernstein / Gagliardo-Nirenberg checks built on it.
//
// Blocks live on the integer lattice:
//   Delta_{-1} = chi(|k|),   Delta_j = chi(2^{-j-1}|k|) - chi(2^{-j}|k|)  (0 <= j < j_max),
//   Delta_{j_max} = 1 - chi(2^{-j_max}|k|)  (absorbs everything up to Nyquist),
// so that sum_j Delta_j = 1 and S_M = sum_{k <= M-1} Delta_k = chi(2^{-M}|k|) hold exactly.
#pragma once

#include <string>
#include <vector>

#include "nsc/field.hpp"

namespace nsc::lp {

// Smooth radial profile: 1 on [0,1], 0 on [2,inf), C-infinity exp-based transition.
double chi(double r);

class DyadicDecomposition {
 public:
  explicit DyadicDecomposition(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int j_max() const { return j_max_; }

  // Symbol of Delta_j at |k|; j in [-1, j_max].
  double block_symbol(int j, double kabs) const;
  // Symbol of S_M at |k|; M >= 0.
  double low_pass_symbol(int M, double kabs) const;

  ScalarField block(const ScalarField& u, int j) const;
  ScalarField low_pass(const ScalarField& u, int M) const;
  // All blocks j = -1 .. j_max, index j + 1.
  std::vector<ScalarField> blocks(const ScalarField& u) const;

 private:
  GridPtr grid_;
  int j_max_;
};

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;  // [1, inf]
  double r = 2.0;  // [1, inf]
  BesovIndex() = default;
  BesovIndex(double s_, double p_, double r_);
};

struct SobolevNorms {
  double direct = 0.0;  // sqrt(area sum (1+|k|^2)^s |u_hat|^2)
  double lp = 0.0;      // (sum_j 2^{2js} ||Delta_j u||_2^2)^{1/2}
};

SobolevNorms sobolev_norms(const DyadicDecomposition& dec, const ScalarField& u, double s);
double besov_norm(const DyadicDecomposition& dec, const ScalarField& u, const BesovIndex& idx);

// Bony decomposition with exact grid products: u v = T_u v + T_v u + R(u, v).
ScalarField paraproduct(const DyadicDecomposition& dec, const ScalarField& u, const ScalarField& v);
ScalarField remainder(const DyadicDecomposition& dec, const ScalarField& u, const ScalarField& v);

// [S_M, a] f = S_M(a f) - a S_M f
ScalarField commutator_low_pass(const DyadicDecomposition& dec, const ScalarField& a, const ScalarField& f, int M);

struct BernsteinReport {
  int j = 0;
  double ratio = 0.0;  // ||grad u|| / (2^j ||u||)
  double constant = 4.0;
  bool pass = false;
};

// Annulus used by the Bernstein check: 2^{j-1} <= |k| <= 2^{j+1}.
bool in_bernstein_annulus(int j, double kabs);
// Throws std::invalid_argument when u has energy outside the annulus of block j.
BernsteinReport bernstein_check(const ScalarField& u, int j, double constant = 4.0);

struct GagliardoNirenbergReport {
  double p = 0.0;
  double lambda = 0.0;  // (p-2)/p in two dimensions
  double lp_norm = 0.0;
  double bound_without_constant = 0.0;  // ||u||_2^{1-lambda} ||grad u||_2^lambda
  double constant = 0.0;                // empirical ratio
};

// Requires p > 2 and a zero-mean field; throws std::invalid_argument otherwise.
GagliardoNirenbergReport gagliardo_nirenberg_check(const ScalarField& u, double p);

// Frozen constants measured once on the seeded corpus of the property suite.
struct FrozenConstants {
  static constexpr double sobolev_equivalence = 4.0;   // LP / direct in [1/C, C]
  static constexpr double paraproduct_hs = 1.0;        // ||T_u v||_{H^s} <= C ||u||_inf ||v||_{H^s}
  static constexpr double product_case_iii = 0.25;      // ||a b||_2 <= C ||a||_{H^eta} ||b||_{H^1}
  static constexpr double product_case_v = 0.25;        // ||a b||_{H^{1-delta}} <= C ||a||_{H^1} ||b||_{H^1}
  static constexpr double gagliardo_nirenberg_p4 = 0.75;
  static constexpr double embedding_2_to_inf = 1.5;    // ||u||_{B^{s-1}_{inf,inf}} <= C ||u||_{B^s_{2,inf}}
  static constexpr double commutator_slope_tol = 0.25;
};

struct PropertyRow {
  std::string property;
  int n = 0;
  std::string parameter;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// Seeded property suite over the given grid sizes. Deterministic for a fixed seed.
std::vector<PropertyRow> run_property_suite(const std::vector<int>& sizes, unsigned long long seed);

// Random field with random phases and |u_hat| proportional to |k|^-1 for 1 <= |k| <= kmax:
// equal energy in every dyadic shell. Spectral, unit L2 norm.
ScalarField shell_balanced_field(GridPtr grid, unsigned long long seed, double kmax);

// Least-squares slope of log2(values) against M.
double log2_slope(const std::vector<int>& M, const std::vector<double>& values);

}  // namespace nsc::lp
