#include "gtv/legendre.hpp"

#include <cmath>
#include <string>

#include "gtv/errors.hpp"
#include "gtv/sphere.hpp"

namespace gtv {

std::int64_t multiplicity(int d, int n) {
  if (d < 2) throw InputError("multiplicity: dimension must be >= 2");
  if (n < 0) throw InputError("multiplicity: degree must be >= 0");
  if (n == 0) return 1;
  // binom(n + d - 3, d - 2), built so every intermediate quotient is exact.
  std::int64_t b = 1;
  for (int i = 1; i <= d - 2; ++i) b = b * (n - 1 + i) / i;
  return (2 * static_cast<std::int64_t>(n) + d - 2) * b / n;
}

std::vector<double> legendre_all(int n_max, double t) {
  if (!(std::abs(t) <= 1.0)) throw InputError("legendre_all: |t| > 1");
  if (n_max < 0) throw InputError("legendre_all: negative degree");
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  p[0] = 1.0;
  if (n_max >= 1) p[1] = t;
  for (int n = 1; n < n_max; ++n)
    p[n + 1] = ((2.0 * n + 1.0) * t * p[n] - n * p[n - 1]) / (n + 1.0);
  return p;
}

QuadratureRule QuadratureRule::mapped(double a, double b) const {
  QuadratureRule out;
  out.nodes.resize(nodes.size());
  out.weights.resize(weights.size());
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.nodes[i] = mid + half * nodes[i];
    out.weights[i] = half * weights[i];
  }
  return out;
}

QuadratureRule gauss_legendre(int q) {
  if (q < 1) throw InputError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int n = 1; n < q; ++n) {
        const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
      }
      const double pq = (q == 1) ? t : p1;
      const double pqm1 = (q == 1) ? 1.0 : p0;
      dp = q * (t * pq - pqm1) / (t * t - 1.0);
      const double step = pq / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = t;
    for (int n = 1; n < q; ++n) {
      const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
      p0 = p1;
      p1 = p2;
    }
    dp = (q == 1) ? 1.0 : q * (t * p1 - p0) / (t * t - 1.0);
    if (q % 2 == 1 && i == half - 1) t = 0.0;
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    rule.nodes[i] = -t;
    rule.nodes[q - 1 - i] = t;
    rule.weights[i] = w;
    rule.weights[q - 1 - i] = w;
  }
  return rule;
}

double LegendreSeries::operator()(double t) const { return resynthesize(*this, t); }

LegendreSeries fourier_legendre(const std::function<double(double)>& f, int n_max, int q,
                                std::optional<double> split_at) {
  if (n_max < 0) throw InputError("fourier_legendre: negative degree");
  if (q < 1) throw InputError("fourier_legendre: need at least one quadrature node");
  if (n_max >= 2 * q - 1)
    throw ConfigurationError("fourier_legendre: N_max = " + std::to_string(n_max) +
                             " aliases with a " + std::to_string(q) + "-node rule (need N_max < 2Q - 1)");

  const QuadratureRule base = gauss_legendre(q);
  std::vector<QuadratureRule> pieces;
  if (split_at && *split_at > -1.0 && *split_at < 1.0) {
    pieces.push_back(base.mapped(-1.0, *split_at));
    pieces.push_back(base.mapped(*split_at, 1.0));
  } else {
    pieces.push_back(base);
  }

  LegendreSeries out;
  out.coeffs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (const auto& rule : pieces) {
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double t = rule.nodes[k];
      const double fw = f(t) * rule.weights[k];
      if (fw == 0.0) continue;
      double p0 = 1.0, p1 = t;
      out.coeffs[0] += fw;
      if (n_max >= 1) out.coeffs[1] += fw * t;
      for (int n = 1; n < n_max; ++n) {
        const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
        out.coeffs[n + 1] += fw * p2;
        p0 = p1;
        p1 = p2;
      }
    }
  }
  for (double& c : out.coeffs) c *= 2.0 * kPi;
  return out;
}

double resynthesize(const LegendreSeries& series, double t) {
  if (!(std::abs(t) <= 1.0)) throw InputError("resynthesize: |t| > 1");
  const auto& c = series.coeffs;
  if (c.empty()) return 0.0;
  const double inv4pi = 1.0 / (4.0 * kPi);
  double sum = c[0];
  if (c.size() > 1) sum += 3.0 * c[1] * t;
  double p0 = 1.0, p1 = t;
  for (std::size_t n = 1; n + 1 < c.size(); ++n) {
    const double dn = static_cast<double>(n);
    const double p2 = ((2.0 * dn + 1.0) * t * p1 - dn * p0) / (dn + 1.0);
    sum += (2.0 * dn + 3.0) * c[n + 1] * p2;
    p0 = p1;
    p1 = p2;
  }
  return sum * inv4pi;
}

}  // namespace gtv
