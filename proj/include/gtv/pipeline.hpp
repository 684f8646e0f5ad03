#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gtv/kernels.hpp"
#include "gtv/solvers.hpp"
#include "gtv/spline.hpp"

namespace gtv {

// ---- data files ----------------------------------------------------------

struct ScatterData {
  std::vector<Direction> directions;
  Eigen::VectorXd values;
};

/// CSV with header `lon_deg,lat_deg,value`.
ScatterData load_scatter_csv(const std::filesystem::path& path);
void save_scatter_csv(const std::filesystem::path& path, const ScatterData& data);

struct PatchCounts {
  std::vector<PatchBounds> patches;
  std::vector<std::int64_t> counts;
};

/// CSV with header `lon_min,lon_max,lat_min,lat_max,count`.
PatchCounts load_patch_counts_csv(const std::filesystem::path& path);
void save_patch_counts_csv(const std::filesystem::path& path, const PatchCounts& data);

/// `index,lon_deg,lat_deg,coeff`.
void save_coefficients_csv(const std::filesystem::path& path, const SplineField& field);
/// Knots and coefficients from a coefficient file.
std::pair<KnotSet, Eigen::VectorXd> load_coefficients_csv(const std::filesystem::path& path);

/// Field values at the cell centres of an n_lat x n_lon equal-angle grid, as
/// `lon_deg,lat_deg,value` rows ordered by latitude then longitude.
void export_raster(const SplineField& field, int n_lat, int n_lon, const std::filesystem::path& path);

// ---- synthetic data ------------------------------------------------------

/// Seed of an independent stream derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n directions uniform on the sphere.
std::vector<Direction> random_directions(std::size_t n, std::uint64_t seed);

/// K knots uniform on the sphere with amplitudes uniform in [amp_min, amp_max].
SplineField plant_spline(const ZonalKernel& kernel, std::size_t k, double amp_min, double amp_max,
                         std::uint64_t seed);

/// K distinct knots of the given set carry amplitudes uniform in [amp_min, amp_max];
/// the other coefficients are zero.
SplineField plant_on_knots(const ZonalKernel& kernel, const KnotSet& knots, std::size_t k, double amp_min,
                           double amp_max, std::uint64_t seed);

/// Adds N(0, s^2) deviates with s = max|v| 10^(-psnr/20).
Eigen::VectorXd add_gaussian_noise(const Eigen::VectorXd& values, double psnr_db, std::uint64_t seed);

std::vector<std::int64_t> poisson_counts(const Eigen::VectorXd& rates, std::uint64_t seed);

// ---- runs ----------------------------------------------------------------

struct KernelSpec {
  std::string family = "matern";  // matern | wendland | sobolev
  double beta = 2.5;              // matern, sobolev
  int d = 3, k = 1;               // wendland
  std::optional<double> epsilon = 0.2;
  std::optional<double> fwhm_deg;  // replaces epsilon when given
  std::string convention = "standard";
  double green_tolerance = kDefaultGreenTolerance;
};

struct SyntheticSpec {
  std::string sampling = "dirac";  // dirac | patches
  std::string planted = "lattice";  // lattice | random
  int n_planted = 10;
  double amp_min = 0.5, amp_max = 1.5;
  int n_samples = 600;               // dirac
  std::optional<double> psnr_db;     // dirac
  int n_lat = 120, n_lon = 240;      // patches
  double rate_scale = 1.0;           // patches: rate = rate_scale * integral of the field
};

struct SamplingSpec {
  std::optional<std::string> scatter_csv;
  std::optional<std::string> patch_csv;
  std::optional<SyntheticSpec> synthetic;
  int patch_quadrature = kDefaultPatchQuadrature;
  double abs_cutoff = kDefaultAbsCutoff;
};

struct CostSpec {
  std::string kind = "exact";  // exact | l2ball | l1 | kl | ls
  double rho_rel = 0.005;      // l2ball radius relative to |y|
};

struct SolverSpec {
  std::string kind = "pds";  // pds | apgd | tikhonov
  double lambda = 1.0;
  double mu = 1e-3;  // tikhonov
  double eps_stop = 1e-4;
  int max_iter = 10000;
  double theta = 75.0;
  std::optional<double> tau, sigma;
  double cg_tol = 1e-10;
  int cg_max_iter = 10000;
};

struct RasterSpec {
  int n_lat = 180, n_lon = 360;
  std::string file = "raster.csv";
};

struct OutputSpec {
  std::string dir = ".";
  std::string coefficients = "coefficients.csv";
  std::string manifest = "manifest.json";
  std::string trace = "trace.csv";
  std::optional<RasterSpec> raster;
};

struct SweepSpec {
  double lambda_min = 0.0, lambda_max = 0.0;
  int count = 0;
};

struct RunConfig {
  KernelSpec kernel;
  int n_knots = 200;  // Fibonacci lattice size
  SamplingSpec sampling;
  CostSpec cost;
  SolverSpec solver;
  std::uint64_t seed = 0;
  OutputSpec outputs;
  std::optional<SweepSpec> sweep;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Throws ConfigurationError on inconsistent settings.
  void validate() const;
};

ZonalKernel make_kernel(const KernelSpec& spec);

struct RunManifest {
  nlohmann::json document;
  std::filesystem::path path;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double residual = 0.0;
  double relative_residual = 0.0;
  std::size_t sparsity = 0;
};

/// Knots, Gram assembly, solve, synthesis and file output for one config.
RunManifest run_reconstruction(const RunConfig& config);

}  // namespace gtv
