#include "gtv/pdo.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "gtv/errors.hpp"
#include "gtv/sphere.hpp"

namespace gtv {

struct FourierSymbol::Memo {
  mutable std::shared_mutex mutex;
  std::unordered_map<int, double> values;
};

FourierSymbol::FourierSymbol(Rule rule, double growth_order, std::set<int> zero_set, int dim,
                             double lower_constant, int lower_from, std::string name)
    : rule_(std::move(rule)),
      growth_order_(growth_order),
      zero_set_(std::move(zero_set)),
      dim_(dim),
      lower_constant_(lower_constant),
      lower_from_(std::max(lower_from, 1)),
      name_(std::move(name)),
      memo_(std::make_shared<Memo>()) {
  if (dim_ < 2) throw InputError("FourierSymbol: dimension must be >= 2");
  if (!rule_) throw InputError("FourierSymbol: empty rule");
}

double FourierSymbol::operator()(int n) const {
  if (n < 0) throw InputError("FourierSymbol: negative degree");
  if (in_zero_set(n)) return 0.0;
  {
    std::shared_lock lock(memo_->mutex);
    if (auto it = memo_->values.find(n); it != memo_->values.end()) return it->second;
  }
  const double v = rule_(n);
  std::unique_lock lock(memo_->mutex);
  memo_->values.emplace(n, v);  // a concurrent insert of the same value is harmless
  return v;
}

FourierSymbol sobolev_symbol(double beta, int d) {
  if (!(beta > 0.0)) throw InputError("sobolev_symbol: beta must be > 0");
  // (1 + n(n+d-2))^beta >= n^{2 beta}
  return FourierSymbol(
      [beta, d](int n) {
        const double nn = n;
        return std::pow(1.0 + nn * (nn + d - 2.0), beta);
      },
      2.0 * beta, {}, d, 1.0, 1, "sobolev");
}

FourierSymbol laplacian_symbol(const LaplacianKind& kind, int d) {
  if (const auto* it = std::get_if<IteratedLaplacian>(&kind)) {
    const int k = it->k;
    if (k < 1) throw InputError("laplacian_symbol: iteration count must be >= 1");
    return FourierSymbol(
        [k, d](int n) {
          const double nn = n;
          return std::pow(-nn * (nn + d - 2.0), k);
        },
        2.0 * k, {0}, d, 1.0, 1, "iterated_laplacian");
  }
  const int q = std::get<FractionalLaplacian>(kind).q;
  if (q < 1) throw InputError("laplacian_symbol: fractional root must be >= 1");
  return FourierSymbol(
      [q, d](int n) {
        const double nn = n;
        return std::pow(nn * (nn + d - 2.0), 1.0 / q);
      },
      2.0 / q, {0}, d, 1.0, 1, "fractional_laplacian");
}

FourierSymbol pseudoinverse_symbol(const FourierSymbol& sym) {
  return FourierSymbol(
      [sym](int n) {
        const double v = sym(n);
        return v == 0.0 ? 0.0 : 1.0 / v;
      },
      -sym.growth_order(), sym.zero_set(), sym.dim(), 0.0, 1, "pinv_" + sym.name());
}

FourierSymbol sqrt_symbol(const FourierSymbol& sym) {
  return FourierSymbol(
      [sym](int n) {
        const double v = sym(n);
        if (v < 0.0) throw DomainError("sqrt_symbol: symbol is not positive semi-definite");
        return std::sqrt(v);
      },
      0.5 * sym.growth_order(), sym.zero_set(), sym.dim(), std::sqrt(std::max(sym.lower_constant(), 0.0)),
      sym.lower_from(), "sqrt_" + sym.name());
}

FourierSymbol nullspace_regularize(const FourierSymbol& sym, double gamma) {
  if (!(gamma > 0.0)) throw InputError("nullspace_regularize: gamma must be > 0");
  const std::set<int> kernel = sym.zero_set();
  int from = sym.lower_from();
  if (!kernel.empty()) from = std::max(from, *kernel.rbegin() + 1);
  return FourierSymbol(
      [sym, kernel, gamma](int n) { return kernel.count(n) ? gamma : sym(n); }, sym.growth_order(), {},
      sym.dim(), sym.lower_constant(), from, sym.name() + "_regularized");
}

AdmissibilityReport is_spline_admissible(const FourierSymbol& sym) {
  const double threshold = sym.dim() - 1.0;
  return {sym.growth_order() > threshold, sym.growth_order(), threshold};
}

namespace {

// Upper bound on sum_{n>N} N_d(n) n^{-p} / a_d via the integral of the decreasing
// majorant; only d = 2 and d = 3 are supported.
double tail_bound(int d, double p, double n, double c_lower) {
  const double area = sphere_area(d);
  double integral = 0.0;
  if (d == 3) {
    integral = 2.0 * std::pow(n, 2.0 - p) / (p - 2.0) + std::pow(n, 1.0 - p) / (p - 1.0);
  } else if (d == 2) {
    integral = 2.0 * std::pow(n, 1.0 - p) / (p - 1.0);
  } else {
    throw InputError("green_series: only d = 2 and d = 3 are supported");
  }
  return integral / (area * c_lower);
}

}  // namespace

int green_truncation(const FourierSymbol& sym, double tol) {
  const auto adm = is_spline_admissible(sym);
  if (!adm.admissible)
    throw DomainError("green_series: operator '" + sym.name() + "' with growth order " +
                      std::to_string(adm.growth_order) + " is not spline-admissible (need p > " +
                      std::to_string(adm.threshold) + ")");
  if (!(tol > 0.0)) throw InputError("green_series: tol must be > 0");
  if (!(sym.lower_constant() > 0.0)) throw DomainError("green_series: symbol has no lower growth bound");

  constexpr int kMaxDegree = 10'000'000;
  const double p = sym.growth_order();
  const double c = sym.lower_constant();
  const int d = sym.dim();
  int lo = sym.lower_from();
  if (tail_bound(d, p, lo, c) < tol) return lo;
  int hi = lo;
  while (tail_bound(d, p, hi, c) >= tol) {
    if (hi >= kMaxDegree) throw NumericalError("green_series: truncation degree exceeds 10^7");
    lo = hi;
    hi = std::min(2 * hi, kMaxDegree);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (tail_bound(d, p, mid, c) < tol ? hi : lo) = mid;
  }
  return hi;
}

LegendreSeries green_series(const FourierSymbol& sym, double tol) {
  const int n_max = green_truncation(sym, tol);
  LegendreSeries out;
  out.dim = sym.dim();
  out.coeffs.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double v = sym(n);
    out.coeffs[n] = (v == 0.0) ? 0.0 : 1.0 / v;
  }
  return out;
}

double fitted_growth_order(const FourierSymbol& sym, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi <= n_lo) throw InputError("fitted_growth_order: need 1 <= n_lo < n_hi");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double v = std::abs(sym(n));
    if (v == 0.0) continue;
    const double x = std::log(static_cast<double>(n)), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw DomainError("fitted_growth_order: not enough nonzero symbol values");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

CompatibilityReport check_compatibility(const FourierSymbol& sym, FunctionalKind kind) {
  const double threshold = (kind == FunctionalKind::dirac) ? sym.dim() - 1.0 : 0.5 * (sym.dim() - 1.0);
  return {sym.growth_order() > threshold, sym.growth_order(), threshold};
}

}  // namespace gtv
