#include "gtv/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "gtv/errors.hpp"
#include "gtv/sphere.hpp"

namespace gtv {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::matern: return "matern";
    case KernelFamily::wendland: return "wendland";
    case KernelFamily::sobolev_series: return "sobolev_series";
    case KernelFamily::custom_series: return "custom_series";
  }
  return "unknown";
}

ZonalKernel::ZonalKernel(KernelFamily family, Profile profile, double beta, double epsilon,
                         std::optional<double> support_tmin, std::shared_ptr<const LegendreSeries> series,
                         std::string description)
    : family_(family),
      profile_(std::make_shared<const Profile>(std::move(profile))),
      beta_(beta),
      epsilon_(epsilon),
      support_tmin_(support_tmin),
      series_(std::move(series)),
      description_(std::move(description)) {}

double ZonalKernel::operator()(double t) const {
  t = std::clamp(t, -1.0, 1.0);
  if (support_tmin_ && t <= *support_tmin_) return 0.0;
  return (*profile_)(t);
}

bool ZonalKernel::radially_monotone() const {
  return family_ == KernelFamily::matern || family_ == KernelFamily::wendland;
}

ZonalKernel ZonalKernel::with_lipschitz_sq(double value) const {
  ZonalKernel out = *this;
  out.lipschitz_sq_ = value;
  return out;
}

double ZonalKernel::cutoff_inner(double abs_cutoff) const {
  double t_edge = support_tmin_.value_or(-1.0);
  if (!radially_monotone() || !(abs_cutoff > 0.0)) return t_edge;
  auto at_chord = [this](double c) { return std::abs((*this)(inner_from_chord(c))); };
  if (at_chord(2.0) > abs_cutoff) return t_edge;
  // smallest chord with |psi| <= cutoff
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at_chord(mid) <= abs_cutoff ? hi : lo) = mid;
  }
  return std::max(t_edge, inner_from_chord(hi));
}

// ---------------------------------------------------------------------------

double matern_halfinteger(int p, double r) {
  if (p < 0) throw InputError("matern_halfinteger: p must be >= 0");
  if (r < 0.0) throw InputError("matern_halfinteger: r must be >= 0");
  // p!/(2p)! * sum_i (p+i)! / (i! (p-i)!) * (sqrt(8p+4) r)^{p-i}
  const double x = std::sqrt(8.0 * p + 4.0) * r;
  double sum = 0.0;
  for (int i = 0; i <= p; ++i) {
    const double log_c = std::lgamma(p + 1.0) - std::lgamma(2.0 * p + 1.0) + std::lgamma(p + i + 1.0) -
                         std::lgamma(i + 1.0) - std::lgamma(p - i + 1.0);
    sum += std::exp(log_c) * std::pow(x, p - i);
  }
  return std::exp(-std::sqrt(2.0 * p + 1.0) * r) * sum;
}

ZonalKernel matern_zonal(double beta, double epsilon, MaternConvention convention) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InputError("matern_zonal: epsilon must lie in (0, 1]");
  const double nu = beta - 1.0;  // nu = beta - (d-1)/2 with d = 3
  const double two_p = nu - 0.5;
  const double rounded = std::round(two_p);
  if (!(nu > 0.0) || std::abs(two_p - rounded) > 1e-12)
    throw InputError("matern_zonal: beta - 1 must be a half-integer (1/2, 3/2, ...)");
  const int p = static_cast<int>(rounded);
  const double rate = (convention == MaternConvention::standard) ? 1.0 : 1.0 / std::sqrt(2.0 * p + 1.0);
  auto profile = [p, epsilon, rate](double t) { return matern_halfinteger(p, rate * chord_from_inner(t) / epsilon); };
  std::string desc = "matern(beta=" + std::to_string(beta) + ", eps=" + std::to_string(epsilon) +
                     (convention == MaternConvention::standard ? ", standard)" : ", unit_rate)");
  return ZonalKernel(KernelFamily::matern, profile, beta, epsilon, std::nullopt, nullptr, std::move(desc));
}

// ---------------------------------------------------------------------------

namespace {

Rational binomial(int n, int k) {
  Rational b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Polynomial evaluation by Horner in double precision.
double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace

double WendlandPolynomial::operator()(double r) const {
  if (r < 0.0) r = -r;
  if (r >= 1.0) return 0.0;
  return std::pow(1.0 - r, l + k) * horner(factor_values, r);
}

WendlandPolynomial wendland_construct(int d, int k) {
  if (d < 1) throw InputError("wendland_construct: d must be >= 1");
  if (k < 0) throw InputError("wendland_construct: k must be >= 0");
  WendlandPolynomial w;
  w.d = d;
  w.k = k;
  w.l = d / 2 + k + 1;

  // (1 - r)^l in the monomial basis
  std::vector<Rational> poly(w.l + 1);
  for (int j = 0; j <= w.l; ++j) poly[j] = (j % 2 ? -1 : 1) * binomial(w.l, j);

  // (I phi)(r) = int_r^1 t phi(t) dt = F(1) - F(r) with F' = t phi(t), F(0) = 0.
  for (int step = 0; step < k; ++step) {
    std::vector<Rational> anti(poly.size() + 2, Rational(0));
    for (std::size_t j = 0; j < poly.size(); ++j) anti[j + 2] = poly[j] / static_cast<long>(j + 2);
    Rational at_one = 0;
    for (const auto& c : anti) at_one += c;
    for (auto& c : anti) c = -c;
    anti[0] += at_one;
    poly = std::move(anti);
  }
  while (poly.size() > 1 && poly.back() == 0) poly.pop_back();

  w.raw_value_at_zero = poly[0];
  if (w.raw_value_at_zero == 0) throw NumericalError("wendland_construct: vanishing value at r = 0");
  for (auto& c : poly) c /= w.raw_value_at_zero;
  w.coeffs = poly;

  // Divide out (1 - r)^{l+k}; each step is synthetic division by (r - 1) and a sign flip.
  std::vector<Rational> q = poly;
  for (int step = 0; step < w.l + k; ++step) {
    const std::size_t n = q.size() - 1;
    std::vector<Rational> quot(n);
    Rational carry = 0;
    for (std::size_t i = n; i >= 1; --i) {
      carry = q[i] + carry;
      quot[i - 1] = carry;
      if (i == 1) break;
    }
    // remainder = q[0] + carry must vanish
    if (q[0] + carry != 0) throw NumericalError("wendland_construct: (1-r) factorisation failed");
    for (auto& c : quot) c = -c;
    q = std::move(quot);
  }
  w.factor = std::move(q);
  for (const auto& c : w.factor) w.factor_values.push_back(static_cast<double>(c));
  return w;
}

ZonalKernel wendland_zonal(int d, int k, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InputError("wendland_zonal: epsilon must lie in (0, 1]");
  auto phi = std::make_shared<const WendlandPolynomial>(wendland_construct(d, k));
  auto profile = [phi, epsilon](double t) { return (*phi)(chord_from_inner(t) / epsilon); };
  std::string desc = "wendland(d=" + std::to_string(d) + ", k=" + std::to_string(k) +
                     ", eps=" + std::to_string(epsilon) + ")";
  return ZonalKernel(KernelFamily::wendland, profile, k + 0.5 * d, epsilon, 1.0 - 0.5 * epsilon * epsilon,
                     nullptr, std::move(desc));
}

// ---------------------------------------------------------------------------

ZonalKernel series_kernel(const LegendreSeries& series, double beta, KernelFamily family) {
  const double peak = resynthesize(series, 1.0);
  if (!(peak != 0.0) || !std::isfinite(peak)) throw DomainError("series_kernel: series vanishes at t = 1");
  auto normalised = std::make_shared<LegendreSeries>(series);
  for (double& c : normalised->coeffs) c /= peak;
  std::shared_ptr<const LegendreSeries> frozen = normalised;
  auto profile = [frozen](double t) { return resynthesize(*frozen, t); };
  return ZonalKernel(family, profile, beta, 1.0, std::nullopt, frozen,
                     to_string(family) + "(N_max=" + std::to_string(frozen->n_max()) + ")");
}

ZonalKernel sobolev_green_zonal(double beta, int d, double tol, double* peak_before_normalisation) {
  if (!(beta > 0.5 * (d - 1)))
    throw DomainError("sobolev_green_zonal: beta = " + std::to_string(beta) +
                      " is not spline-admissible (need 2 beta > d - 1)");
  const LegendreSeries raw = green_series(sobolev_symbol(beta, d), tol);
  if (peak_before_normalisation) *peak_before_normalisation = resynthesize(raw, 1.0);
  return series_kernel(raw, beta, KernelFamily::sobolev_series);
}

LegendreSeries fourier_legendre(const ZonalKernel& kernel, int n_max, int q) {
  if (const LegendreSeries* s = kernel.series()) {
    LegendreSeries out = *s;
    out.coeffs.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
    return out;
  }
  return fourier_legendre([&kernel](double t) { return kernel(t); }, n_max, q, kernel.support_tmin());
}

LegendreSeries self_convolve(const LegendreSeries& series) {
  LegendreSeries out = series;
  for (double& c : out.coeffs) c *= c;
  return out;
}

double lipschitz_estimate(const ZonalKernel& kernel, int grid) {
  if (grid < 100) throw InputError("lipschitz_estimate: grid must be >= 100");
  std::vector<double> theta(grid), value(grid);
  for (int i = 0; i < grid; ++i) {
    theta[i] = kPi * i / (grid - 1.0);
    value[i] = kernel(std::cos(theta[i]));
  }
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = i + 1; j < grid; ++j) {
      const double dv = std::abs(value[j] - value[i]);
      if (dv == 0.0) continue;
      best = std::max(best, dv / (2.0 * std::sin(0.5 * (theta[j] - theta[i]))));
    }
  }
  return best;
}

double fwhm_degrees(const ZonalKernel& kernel) {
  const double half = 0.5 * kernel(1.0);
  if (kernel(-1.0) >= half) return 360.0;
  double lo = 0.0, hi = kPi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kernel(std::cos(mid)) > half ? lo : hi) = mid;
  }
  return 2.0 * (0.5 * (lo + hi)) * 180.0 / kPi;
}

double epsilon_for_fwhm(const std::function<ZonalKernel(double)>& make_kernel, double target_fwhm_deg) {
  if (!(target_fwhm_deg > 0.0)) throw InputError("epsilon_for_fwhm: target must be positive");
  double lo = 1e-6, hi = 1.0;
  if (fwhm_degrees(make_kernel(hi)) < target_fwhm_deg)
    throw InputError("epsilon_for_fwhm: target FWHM not reachable with eps <= 1");
  if (fwhm_degrees(make_kernel(lo)) > target_fwhm_deg)
    throw InputError("epsilon_for_fwhm: target FWHM below the smallest supported scale");
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fwhm_degrees(make_kernel(mid)) < target_fwhm_deg ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FourierSymbol equivalent_symbol(const ZonalKernel& kernel) {
  const double beta = kernel.beta();
  switch (kernel.family()) {
    case KernelFamily::sobolev_series: return sobolev_symbol(beta, 3);
    case KernelFamily::matern:
    case KernelFamily::wendland:
    case KernelFamily::custom_series: {
      const double eps = kernel.epsilon();
      return FourierSymbol([eps, beta](int n) { return std::pow(1.0 + eps * n, 2.0 * beta); }, 2.0 * beta, {}, 3,
                           std::pow(eps, 2.0 * beta), 1, to_string(kernel.family()) + "_equivalent");
    }
  }
  throw DomainError("equivalent_symbol: unknown kernel family");
}

}  // namespace gtv
