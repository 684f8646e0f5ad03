#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtv/legendre.hpp"
#include "gtv/pdo.hpp"

namespace gtv {

enum class KernelFamily { matern, wendland, sobolev_series, custom_series };

std::string to_string(KernelFamily f);

/// Zonal function t = <r, s> -> psi(t) on [-1, 1], peak-normalised so psi(1) = 1.
///
/// Kernels are immutable and cheap to copy (shared state). Evaluation clamps t
/// to [-1, 1] so inner products with rounding noise can be passed directly.
class ZonalKernel {
 public:
  using Profile = std::function<double(double)>;

  ZonalKernel(KernelFamily family, Profile profile, double beta, double epsilon,
              std::optional<double> support_tmin, std::shared_ptr<const LegendreSeries> series = nullptr,
              std::string description = {});

  double operator()(double t) const;

  KernelFamily family() const { return family_; }
  double beta() const { return beta_; }
  double epsilon() const { return epsilon_; }
  std::optional<double> support_tmin() const { return support_tmin_; }
  bool compact() const { return support_tmin_.has_value(); }
  /// True for families known to be non-increasing in the chord distance.
  bool radially_monotone() const;
  const std::string& description() const { return description_; }

  /// Fourier-Legendre series backing series-defined kernels (null otherwise).
  const LegendreSeries* series() const { return series_.get(); }

  std::optional<double> lipschitz_sq() const { return lipschitz_sq_; }
  ZonalKernel with_lipschitz_sq(double value) const;

  /// Inner product below which |psi| <= abs_cutoff is guaranteed; -1 when no
  /// pruning is possible. Compact kernels report at least their support edge.
  double cutoff_inner(double abs_cutoff) const;

 private:
  KernelFamily family_;
  std::shared_ptr<const Profile> profile_;
  double beta_;
  double epsilon_;
  std::optional<double> support_tmin_;
  std::shared_ptr<const LegendreSeries> series_;
  std::optional<double> lipschitz_sq_;
  std::string description_;
};

/// Half-integer Matern function S_{p+1/2}(r), an exponential times a degree-p polynomial.
double matern_halfinteger(int p, double r);

/// `standard` keeps the sqrt(2 nu) rate of the Matern function; `unit_rate` uses
/// exp(-x) scaling, e.g. (1 + x) e^{-x} for nu = 3/2.
enum class MaternConvention { standard, unit_rate };

/// psi(t) = S_nu(sqrt(2 - 2t) / eps) with nu = beta - 1 a half-integer.
ZonalKernel matern_zonal(double beta, double epsilon, MaternConvention convention = MaternConvention::standard);

using Rational = boost::multiprecision::cpp_rational;

/// Wendland function phi_{d,k}(r) = (1 - r)_+^{l+k} p_{k,l}(r), l = floor(d/2) + k + 1,
/// stored with exact rational coefficients and normalised to phi(0) = 1.
struct WendlandPolynomial {
  int d = 3, k = 0, l = 2;
  std::vector<Rational> coeffs;  // monomial coefficients on [0, 1], after normalisation
  std::vector<Rational> factor;  // p_{k,l}, so that coeffs == (1 - r)^{l+k} * factor
  Rational raw_value_at_zero;    // value of I^k phi_l at 0 before normalisation
  std::vector<double> factor_values;  // factor rounded to double, used by operator()

  double operator()(double r) const;
};

WendlandPolynomial wendland_construct(int d, int k);

/// psi(t) = phi_{d,k}(sqrt(2 - 2t) / eps), supported on t > 1 - eps^2 / 2, beta = k + d/2.
ZonalKernel wendland_zonal(int d, int k, double epsilon);

/// Green kernel of the Sobolev operator, synthesised from its Fourier-Legendre
/// series. `peak_before_normalisation` receives psi(1) of the raw series.
ZonalKernel sobolev_green_zonal(double beta, int d, double tol = kDefaultGreenTolerance,
                                double* peak_before_normalisation = nullptr);

/// Kernel evaluated by resynthesis of the given series, peak-normalised.
ZonalKernel series_kernel(const LegendreSeries& series, double beta,
                          KernelFamily family = KernelFamily::custom_series);

/// Fourier-Legendre coefficients of a kernel; compact kernels are integrated
/// piecewise around their support edge. Series kernels return their own series.
LegendreSeries fourier_legendre(const ZonalKernel& kernel, int n_max = kDefaultLegendreDegree,
                                int q = kDefaultQuadratureNodes);

/// Spherical self-convolution psi * psi in the Fourier-Legendre domain.
LegendreSeries self_convolve(const LegendreSeries& series);

/// Grid lower bound on the Lipschitz constant L^2 of r -> psi(<r, rho>) with
/// respect to the chord distance.
double lipschitz_estimate(const ZonalKernel& kernel, int grid = 1000);

/// Full width at half maximum of the kernel profile, in degrees of arc.
double fwhm_degrees(const ZonalKernel& kernel);

/// Scale eps in (0, 1] whose kernel has the requested FWHM, by bisection.
double epsilon_for_fwhm(const std::function<ZonalKernel(double)>& make_kernel, double target_fwhm_deg);

/// Symbol equivalent to the kernel's operator: (1 + eps n)^{2 beta} for Matern
/// and Wendland kernels, the Sobolev symbol for Sobolev kernels.
FourierSymbol equivalent_symbol(const ZonalKernel& kernel);

}  // namespace gtv
