#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <variant>

#include "gtv/legendre.hpp"

namespace gtv {

/// Pseudo-differential operator on S^{d-1}, described by its Fourier symbol
/// n -> D_n. Symbols are closed-form rules evaluated on demand; values are
/// memoised behind a reader/writer lock so a symbol can be shared across threads.
///
/// `growth_order` is the declared p in |D_n| ~ n^p, and the operator promises
/// |D_n| >= lower_constant * n^p for n >= lower_from. That lower bound drives
/// green_series truncation.
class FourierSymbol {
 public:
  using Rule = std::function<double(int)>;

  FourierSymbol(Rule rule, double growth_order, std::set<int> zero_set, int dim,
                double lower_constant = 1.0, int lower_from = 1, std::string name = "custom");

  double operator()(int n) const;
  double growth_order() const { return growth_order_; }
  const std::set<int>& zero_set() const { return zero_set_; }
  bool in_zero_set(int n) const { return zero_set_.count(n) != 0; }
  bool injective() const { return zero_set_.empty(); }
  int dim() const { return dim_; }
  double lower_constant() const { return lower_constant_; }
  int lower_from() const { return lower_from_; }
  const std::string& name() const { return name_; }

 private:
  struct Memo;

  Rule rule_;
  double growth_order_;
  std::set<int> zero_set_;
  int dim_;
  double lower_constant_;
  int lower_from_;
  std::string name_;
  std::shared_ptr<Memo> memo_;
};

/// (Id - Laplace-Beltrami)^beta: D_n = (1 + n(n+d-2))^beta.
FourierSymbol sobolev_symbol(double beta, int d);

struct IteratedLaplacian {
  int k;
};
struct FractionalLaplacian {
  int q;
};
using LaplacianKind = std::variant<IteratedLaplacian, FractionalLaplacian>;

/// Iterated: (-n(n+d-2))^k with p = 2k. Fractional: (n(n+d-2))^{1/q} with p = 2/q.
/// Both vanish at n = 0.
FourierSymbol laplacian_symbol(const LaplacianKind& kind, int d);

/// 1/D_n off the nullspace, 0 on it.
FourierSymbol pseudoinverse_symbol(const FourierSymbol& sym);

/// sqrt(D_n) for positive-definite symbols.
FourierSymbol sqrt_symbol(const FourierSymbol& sym);

/// D + gamma * projection onto the nullspace; makes the symbol injective.
FourierSymbol nullspace_regularize(const FourierSymbol& sym, double gamma);

struct AdmissibilityReport {
  bool admissible;
  double growth_order;
  double threshold;  // d - 1
};

/// Sufficient condition p > d - 1 for pointwise-defined Green kernels.
AdmissibilityReport is_spline_admissible(const FourierSymbol& sym);

inline constexpr double kDefaultGreenTolerance = 1e-8;

/// Truncation degree N used by green_series: the smallest N whose analytic tail
/// bound sum_{n>N} N_d(n) / (a_d |D_n|) is below tol.
int green_truncation(const FourierSymbol& sym, double tol);

/// Fourier-Legendre coefficients 1/D_n (0 on the nullspace) of the zonal Green kernel.
LegendreSeries green_series(const FourierSymbol& sym, double tol = kDefaultGreenTolerance);

/// Least-squares slope of log|D_n| against log n over [n_lo, n_hi].
double fitted_growth_order(const FourierSymbol& sym, int n_lo = 32, int n_hi = 1024);

enum class FunctionalKind { dirac, square_integrable };

struct CompatibilityReport {
  bool compatible;
  double growth_order;
  double threshold;  // d - 1 for Dirac, (d - 1)/2 for square-integrable
};

CompatibilityReport check_compatibility(const FourierSymbol& sym, FunctionalKind kind);

}  // namespace gtv
