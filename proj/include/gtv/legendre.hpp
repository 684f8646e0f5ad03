#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace gtv {

/// Dimension N_d(n) of the degree-n spherical harmonic eigenspace on S^{d-1}.
std::int64_t multiplicity(int d, int n);

/// P_0(t), ..., P_{n_max}(t) by the three-term recurrence.
std::vector<double> legendre_all(int n_max, double t);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  /// Affine copy of a [-1, 1] rule onto [a, b].
  QuadratureRule mapped(double a, double b) const;
};

/// Q-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int q);

/// Fourier-Legendre coefficients of a zonal function on S^2, normalised so that
///   psi(t) = sum_n (2n+1)/(4 pi) * coeffs[n] * P_n(t).
struct LegendreSeries {
  std::vector<double> coeffs;
  int dim = 3;

  int n_max() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double t) const;
};

inline constexpr int kDefaultLegendreDegree = 512;
inline constexpr int kDefaultQuadratureNodes = 600;

/// coeffs[n] = 2 pi * int_{-1}^{1} f(t) P_n(t) dt. When `split_at` is given the
/// integral is evaluated as two separate q-node Gauss rules on [-1, split] and
/// [split, 1], which keeps the accuracy for functions with a kink there.
LegendreSeries fourier_legendre(const std::function<double(double)>& f, int n_max, int q,
                                std::optional<double> split_at = std::nullopt);

double resynthesize(const LegendreSeries& series, double t);

}  // namespace gtv
