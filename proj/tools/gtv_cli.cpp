// Command-line front end: reconstruction runs and synthetic data generation.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gtv/errors.hpp"
#include "gtv/pipeline.hpp"
#include "gtv/version.hpp"

namespace {

struct KernelOptions {
  gtv::KernelSpec spec;
  double epsilon = 0.2;
  double fwhm = 0.0;

  void add(CLI::App* app) {
    app->add_option("--family", spec.family, "matern, wendland or sobolev")->capture_default_str();
    app->add_option("--beta", spec.beta, "Matern/Sobolev smoothness")->capture_default_str();
    app->add_option("--wendland-k", spec.k, "Wendland k")->capture_default_str();
    app->add_option("--epsilon", epsilon, "kernel scale in (0, 1]")->capture_default_str();
    app->add_option("--fwhm", fwhm, "target FWHM in degrees (overrides --epsilon)");
    app->add_option("--convention", spec.convention, "Matern scaling: standard or unit_rate")->capture_default_str();
  }

  gtv::ZonalKernel make() {
    spec.epsilon = epsilon;
    if (fwhm > 0.0) spec.fwhm_deg = fwhm;
    return gtv::make_kernel(spec);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse spline reconstruction of fields on the sphere"};
  app.set_version_flag("--version", std::string(gtv::kVersion));
  app.require_subcommand(1);

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "run a reconstruction from a JSON config");
  std::string config_path;
  std::optional<double> lambda;
  std::optional<std::string> solver;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  rec->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  rec->add_option("--lambda", lambda, "override solver.lambda");
  rec->add_option("--solver", solver, "override solver.kind (pds, apgd, tikhonov)");
  rec->add_option("--seed", seed, "override seed");
  rec->add_option("--output-dir", output_dir, "override outputs.dir");

  // synth-scatter
  auto* ss = app.add_subcommand("synth-scatter", "sample a planted spline at random points");
  KernelOptions ss_kernel;
  ss_kernel.add(ss);
  int ss_samples = 600, ss_planted = 10;
  double ss_psnr = 0.0, ss_amin = 0.5, ss_amax = 1.5;
  std::uint64_t ss_seed = 0;
  std::string ss_out, ss_planted_out;
  ss->add_option("--samples", ss_samples, "number of sample points")->capture_default_str();
  ss->add_option("--planted", ss_planted, "number of planted knots")->capture_default_str();
  ss->add_option("--amp-min", ss_amin)->capture_default_str();
  ss->add_option("--amp-max", ss_amax)->capture_default_str();
  ss->add_option("--psnr", ss_psnr, "Gaussian noise PSNR in dB (0 = noiseless)");
  ss->add_option("--seed", ss_seed)->capture_default_str();
  ss->add_option("--output", ss_out, "scatter CSV to write")->required();
  ss->add_option("--planted-output", ss_planted_out, "also write the planted coefficients");

  // synth-counts
  auto* sc = app.add_subcommand("synth-counts", "Poisson counts of a planted intensity on an equal-angle patch grid");
  KernelOptions sc_kernel;
  sc_kernel.add(sc);
  int sc_lat = 120, sc_lon = 240, sc_planted = 10, sc_q = gtv::kDefaultPatchQuadrature;
  double sc_scale = 1.0, sc_amin = 0.5, sc_amax = 1.5;
  std::uint64_t sc_seed = 0;
  std::string sc_out;
  sc->add_option("--n-lat", sc_lat)->capture_default_str();
  sc->add_option("--n-lon", sc_lon)->capture_default_str();
  sc->add_option("--planted", sc_planted)->capture_default_str();
  sc->add_option("--amp-min", sc_amin)->capture_default_str();
  sc->add_option("--amp-max", sc_amax)->capture_default_str();
  sc->add_option("--rate-scale", sc_scale, "rate = scale * patch integral of the intensity")->capture_default_str();
  sc->add_option("--quadrature", sc_q)->capture_default_str();
  sc->add_option("--seed", sc_seed)->capture_default_str();
  sc->add_option("--output", sc_out, "patch count CSV to write")->required();

  // raster
  auto* ra = app.add_subcommand("raster", "evaluate saved coefficients on an equal-angle grid");
  KernelOptions ra_kernel;
  ra_kernel.add(ra);
  std::string ra_coeffs, ra_out;
  int ra_lat = 180, ra_lon = 360;
  ra->add_option("--coefficients", ra_coeffs, "coefficient CSV")->required()->check(CLI::ExistingFile);
  ra->add_option("--n-lat", ra_lat)->capture_default_str();
  ra->add_option("--n-lon", ra_lon)->capture_default_str();
  ra->add_option("--output", ra_out)->required();

  // lattice
  auto* la = app.add_subcommand("lattice", "write Fibonacci lattice points");
  std::size_t la_n = 1000;
  std::string la_out;
  la->add_option("--n", la_n, "number of points")->capture_default_str();
  la->add_option("--output", la_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rec) {
      auto cfg = gtv::RunConfig::load(config_path);
      if (lambda) cfg.solver.lambda = *lambda;
      if (solver) cfg.solver.kind = *solver;
      if (seed) cfg.seed = *seed;
      if (output_dir) cfg.outputs.dir = *output_dir;
      const auto m = gtv::run_reconstruction(cfg);
      std::printf("iterations %d  converged %s  objective %.10g  relative residual %.3e  active %zu\n", m.iterations,
                  m.converged ? "yes" : "no", m.objective, m.relative_residual, m.sparsity);
      std::printf("manifest written to %s\n", m.path.string().c_str());
    } else if (*ss) {
      const auto kernel = ss_kernel.make();
      const auto field = gtv::plant_spline(kernel, static_cast<std::size_t>(ss_planted), ss_amin, ss_amax,
                                           gtv::derive_seed(ss_seed, 1));
      gtv::ScatterData data;
      data.directions = gtv::random_directions(static_cast<std::size_t>(ss_samples), gtv::derive_seed(ss_seed, 2));
      data.values = gtv::evaluate(field, data.directions);
      if (ss_psnr > 0.0) data.values = gtv::add_gaussian_noise(data.values, ss_psnr, gtv::derive_seed(ss_seed, 3));
      gtv::save_scatter_csv(ss_out, data);
      if (!ss_planted_out.empty()) gtv::save_coefficients_csv(ss_planted_out, field);
    } else if (*sc) {
      const auto kernel = sc_kernel.make();
      const auto field = gtv::plant_spline(kernel, static_cast<std::size_t>(sc_planted), sc_amin, sc_amax,
                                           gtv::derive_seed(sc_seed, 1));
      gtv::PatchCounts data;
      data.patches = gtv::equal_angle_patch_grid(sc_lat, sc_lon);
      std::vector<gtv::SamplingFunctional> fs;
      for (const auto& b : data.patches) fs.emplace_back(gtv::PatchSample{b, sc_q});
      const auto g = gtv::assemble_gram(kernel, fs, field.knots());
      data.counts = gtv::poisson_counts((sc_scale * g.apply(field.coeffs())).cwiseMax(0.0), gtv::derive_seed(sc_seed, 4));
      gtv::save_patch_counts_csv(sc_out, data);
    } else if (*ra) {
      auto [knots, coeffs] = gtv::load_coefficients_csv(ra_coeffs);
      const auto field = gtv::synthesize(ra_kernel.make(), std::move(knots), std::move(coeffs));
      gtv::export_raster(field, ra_lat, ra_lon, ra_out);
    } else if (*la) {
      const auto knots = gtv::fibonacci_lattice(la_n);
      std::ofstream out(la_out);
      if (!out) throw gtv::IoError("cannot write " + la_out);
      out << "index,lon_deg,lat_deg\n";
      char buf[64];
      for (std::size_t i = 0; i < knots.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", knots[i].lon_deg(), knots[i].lat_deg());
        out << i << "," << buf << "\n";
      }
      if (!out) throw gtv::IoError("write failed for " + la_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
