// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "gtv/pipeline.hpp"

using namespace gtv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Matern Bessel oracle by trapezoidal quadrature of K_nu(x) = int_0^inf exp(-x cosh s) cosh(nu s) ds.
double bessel_k(double nu, double x) {
  const double h = 5e-4;
  double sum = 0.5 * std::exp(-x);
  for (int i = 1;; ++i) {
    const double s = i * h;
    const double term = std::exp(-x * std::cosh(s)) * std::cosh(nu * s);
    sum += term;
    if (term < 1e-300 || (term < 1e-30 * sum && s > 1.0)) break;
  }
  return sum * h;
}

double matern_oracle(double nu, double r) {
  const double x = std::sqrt(2.0 * nu) * r;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) * bessel_k(nu, x);
}

Eigen::MatrixXd gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = g(rng) / std::sqrt(double(r));
  return a;
}

double loglog_slope(const LegendreSeries& s, int lo, int hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = lo; n <= hi; ++n) {
    const double x = std::log(double(n)), y = std::log(s.coeffs[n]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

Outcome wendland_exact() {
  const auto w = wendland_construct(3, 1);
  const std::vector<Rational> expect{1, 0, -10, 20, -15, 4};  // (1 - r)^4 (1 + 4r)
  bool ok = w.coeffs.size() == expect.size();
  for (std::size_t i = 0; ok && i < expect.size(); ++i) ok = w.coeffs[i] == expect[i];
  return {ok, fmt("%zu coefficients, exact match %s", w.coeffs.size(), ok ? "yes" : "no")};
}

Outcome matern_bessel() {
  double worst = 0.0;
  for (int p = 0; p <= 3; ++p)
    for (int i = 1; i <= 20; ++i) {
      const double r = 5.0 * i / 20.0;
      worst = std::max(worst, std::abs(matern_halfinteger(p, r) - matern_oracle(p + 0.5, r)));
    }
  return {worst < 1e-8, fmt("max abs error %.3e over 80 points", worst)};
}

Outcome fibonacci_width() {
  const double w = nodal_width(fibonacci_lattice(1000), 100000);
  const double target = 2.728 / std::sqrt(1000.0);
  const double rel = std::abs(w - target) / target;
  return {rel <= 0.1, fmt("width %.5f vs %.5f (rel diff %.3f)", w, target, rel)};
}

Outcome legendre_roundtrip() {
  bool ok = true;
  std::string d;
  for (const auto& [name, k] : std::vector<std::pair<std::string, ZonalKernel>>{
           {"matern", matern_zonal(2.5, 0.1)}, {"wendland", wendland_zonal(3, 1, 0.2)}}) {
    const auto s = fourier_legendre(k, 512, kDefaultQuadratureNodes);
    double err = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double t = -1.0 + i / 1000.0;
      err = std::max(err, std::abs(resynthesize(s, t) - k(t)));
    }
    bool positive = true;
    for (double c : s.coeffs) positive = positive && c > 0.0;
    const double slope = loglog_slope(s, 16, 256);
    const double target = -2.0 * k.beta();
    const bool this_ok = err < 1e-6 && positive && std::abs(slope - target) <= 0.2 * std::abs(target);
    ok = ok && this_ok;
    d += fmt("%s%s: sup err %.2e, positive %s, slope %.3f", d.empty() ? "" : "; ", name.c_str(), err, positive ? "yes" : "no", slope);
  }
  return {ok, d};
}

Outcome prox_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.0, 3.0), step(0.1, 2.0);
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (auto kind : {CostKind::exact_match, CostKind::l1, CostKind::l2_ball, CostKind::kl, CostKind::least_squares}) {
    for (int i = 0; i < 50; ++i) {
      const double y = kind == CostKind::kl ? pos(rng) : u(rng);
      const double tau = step(rng), z = u(rng), rho = 0.2 + pos(rng) / 3.0;
      Eigen::VectorXd yv(1), zv(1);
      yv << y;
      zv << z;
      const CostModel m = kind == CostKind::exact_match ? CostModel::exact_match(yv)
                          : kind == CostKind::l1        ? CostModel::l1(yv)
                          : kind == CostKind::l2_ball   ? CostModel::l2_ball(yv, rho)
                          : kind == CostKind::kl        ? CostModel::kl(yv)
                                                        : CostModel::least_squares(yv);
      auto j = [&](double x) {
        Eigen::VectorXd xv(1);
        xv << x;
        return m.value(xv) + (x - z) * (x - z) / (2.0 * tau);
      };
      double grid_min = std::numeric_limits<double>::infinity();
      for (double x = -10.0; x <= 10.0; x += 1e-3) grid_min = std::min(grid_min, j(x));
      const double got = j(prox_cost(m, tau, zv)[0]);
      worst_gap = std::max(worst_gap, got - grid_min);
    }
  }
  double worst_moreau = 0.0;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd y(8), v(8);
    for (int j = 0; j < 8; ++j) {
      y[j] = std::abs(g(rng));
      v[j] = g(rng);
    }
    const double s = step(rng);
    for (const auto& m : {CostModel::exact_match(y), CostModel::l1(y), CostModel::l2_ball(y, 0.5), CostModel::kl(y),
                          CostModel::least_squares(y)}) {
      const Eigen::VectorXd r = prox_cost(m, s, v) + s * prox_conjugate(m, 1.0 / s, v / s) - v;
      worst_moreau = std::max(worst_moreau, r.norm());
    }
  }
  return {worst_gap <= 1e-9 && worst_moreau < 1e-12,
          fmt("worst prox - grid gap %.3e, worst Moreau residual %.3e", worst_gap, worst_moreau)};
}

Outcome solver_agreement() {
  double worst_obj = 0.0, worst_step = 0.0, worst_norm = 0.0;
  for (unsigned seed : {11u, 12u, 13u}) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd a = gaussian(30, 60, rng);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = g(rng);
    const auto gm = GramMatrix::from_dense(a);
    const auto m = CostModel::least_squares(y);
    SolverConfig c;
    c.lambda = 0.1;
    c.eps_stop = 1e-12;
    c.max_iter = 500000;
    c.record_trace = false;
    const auto p = pds_solve(gm, m, c);
    const auto q = apgd_solve(gm, m, c);
    const double fp = objective(m, gm, p.x, c.lambda), fq = objective(m, gm, q.x, c.lambda);
    worst_obj = std::max(worst_obj, std::abs(fp - fq) / std::abs(fq));
    const double s = spectral_norm(gm);
    worst_step = std::max(worst_step, std::abs(p.sigma * p.tau * s * s - 1.0));
    const double oracle = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
    worst_norm = std::max(worst_norm, std::abs(s - oracle) / oracle);
  }
  return {worst_obj <= 1e-6 && worst_step <= 4 * std::numeric_limits<double>::epsilon() && worst_norm <= 1e-6,
          fmt("objective rel diff %.2e, |sigma tau |G|^2 - 1| %.1e, norm rel err %.2e", worst_obj, worst_step,
              worst_norm)};
}

Outcome representer_sparsity() {
  const auto knots = fibonacci_lattice(200);
  const auto kernel = matern_zonal(2.5, 0.2);
  bool ok = true;
  std::string d;
  for (int l : {10, 25}) {
    d += fmt("L=%d:", l);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const auto planted = plant_on_knots(kernel, knots, std::size_t(l / 5), 0.5, 1.5, derive_seed(seed, 100 + l));
      std::vector<SamplingFunctional> f;
      for (const auto& p : random_directions(std::size_t(l), derive_seed(seed, 200 + l))) f.emplace_back(DiracSample{p});
      const auto g = assemble_gram(kernel, f, knots);
      SolverConfig c;
      c.lambda = 1.0;
      c.eps_stop = 1e-10;
      c.max_iter = 200000;
      c.record_trace = false;
      const auto r = pds_solve(g, CostModel::exact_match(g.apply(planted.coeffs())), c);
      const std::size_t count = sparsity_report(r.x, 1e-4).count;
      ok = ok && count <= std::size_t(l);
      d += fmt(" %zu", count);
    }
    d += "; ";
  }
  return {ok, d + "active coefficient counts"};
}

RunConfig criterion8_config(const std::filesystem::path& dir) {
  RunConfig c;
  c.kernel.family = "matern";
  c.kernel.beta = 2.5;
  c.kernel.epsilon = 0.2;
  c.n_knots = 200;
  SyntheticSpec s;
  s.sampling = "dirac";
  s.planted = "lattice";
  s.n_planted = 10;
  s.n_samples = 600;
  c.sampling.synthetic = s;
  c.cost.kind = "exact";
  c.solver.kind = "pds";
  c.solver.lambda = 1.0;
  c.solver.eps_stop = 1e-12;
  c.solver.max_iter = 200000;
  c.seed = 8;
  c.outputs.dir = dir.string();
  return c;
}

Outcome noiseless_consistency(const std::filesystem::path& root) {
  const auto m = run_reconstruction(criterion8_config(root / "c8"));
  const auto& doc = m.document;
  const double planted_obj = doc["planted"]["objective"].get<double>();
  const bool ok = m.relative_residual <= 1e-6 && m.objective <= planted_obj + 1e-6;
  return {ok, fmt("relative residual %.2e, objective %.9f vs planted %.9f, %d iterations", m.relative_residual,
                  m.objective, planted_obj, m.iterations)};
}

Outcome rkhs_decay() {
  const auto kernel = matern_zonal(2.5, 0.2);
  const auto target = plant_spline(kernel, 10, 0.5, 1.5, 99);
  const double h_norm = native_norm(target, knot_gram(kernel, target.knots()));
  const auto probes = fibonacci_lattice(20000).knots();
  const Eigen::VectorXd h_probe = evaluate(target, probes);
  const double lip = std::sqrt(lipschitz_estimate(kernel));
  std::vector<double> errs;
  double bound = 0.0;
  for (std::size_t n : {100u, 400u, 1600u}) {
    const auto knots = fibonacci_lattice(n);
    const Eigen::VectorXd samples = evaluate(target, knots.knots());
    const auto s = rkhs_project(kernel, knots, samples);
    errs.push_back((evaluate(s, probes) - h_probe).cwiseAbs().maxCoeff());
    if (n == 1600) bound = std::pow(2.0, 1.5) * lip * std::sqrt(nodal_width(knots)) * h_norm;
  }
  const bool ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < bound;
  return {ok, fmt("sup errors %.3e %.3e %.3e, bound at N=1600 %.3e", errs[0], errs[1], errs[2], bound)};
}

Outcome poisson_kl() {
  const auto kernel = wendland_zonal(3, 1, 0.4);
  const auto knots = fibonacci_lattice(500);
  // Twenty hotspots over a weak background keep every true rate positive.
  const auto peaks = plant_on_knots(kernel, knots, 20, 0.5, 1.5, 10);
  const Eigen::VectorXd planted = peaks.coeffs().array() + 0.5 * 20.0 / double(knots.size());
  std::vector<SamplingFunctional> f;
  for (const auto& b : equal_angle_patch_grid(120, 240)) f.emplace_back(PatchSample{b, kDefaultPatchQuadrature});
  const auto g = assemble_gram(kernel, f, knots);
  Eigen::VectorXd rates = g.apply(planted);
  const double scale = 0.5 / rates.mean();  // low-rate instance: mean rate 0.5
  rates *= scale;
  const auto counts = poisson_counts(rates.cwiseMax(0.0), 11);
  Eigen::VectorXd y(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) y[static_cast<Eigen::Index>(i)] = double(counts[i]);
  const auto g_scaled = GramMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor, int>(scale * g.matrix()));

  SolverConfig c;
  c.lambda = 100.0;
  c.eps_stop = 1e-6;
  c.max_iter = 20000;
  c.record_trace = false;
  const auto kl = CostModel::kl(y);
  const auto rk = pds_solve(g_scaled, kl, c);
  const Eigen::VectorXd fitted = g_scaled.apply(rk.x);
  const double j_sol = objective(kl, g_scaled, rk.x, c.lambda);
  const double j_zero = objective(kl, g_scaled, Eigen::VectorXd::Zero(g.cols()), c.lambda);
  const double j_zero_floored = finite_objective(kl, g_scaled, Eigen::VectorXd::Zero(g.cols()), c.lambda);

  const auto ls = CostModel::least_squares(y);
  const auto rl = apgd_solve(g_scaled, ls, c);
  const std::size_t active_kl = sparsity_report(rk.x, 1e-4).count;
  const std::size_t active_ls = sparsity_report(rl.x, 1e-4).count;

  // J(0) is infinite whenever a count is positive, so the floored value is checked as well.
  const bool ok = std::isfinite(j_sol) && fitted.minCoeff() >= 0.0 && j_zero >= 10.0 * j_sol &&
                  j_zero_floored >= 10.0 * j_sol && active_ls <= active_kl;
  return {ok, fmt("mean count %.3f, min fitted %.2e, J(x) %.4g, J(0) %g (floored %.4g), active KL %zu LS %zu, "
                  "%d KL iterations",
                  y.mean(), fitted.minCoeff(), j_sol, j_zero, j_zero_floored, active_kl, active_ls, rk.iterations)};
}

Outcome tikhonov_contrast(const std::filesystem::path& root) {
  auto c = criterion8_config(root / "c11_gtv");
  c.sampling.synthetic->psnr_db = 10.0;
  c.cost.kind = "l2ball";
  c.cost.rho_rel = 0.3;
  c.solver.eps_stop = 1e-6;
  c.solver.max_iter = 50000;
  const auto gtv_run = run_reconstruction(c);
  c.solver.kind = "tikhonov";
  c.solver.mu = 0.1;
  c.outputs.dir = (root / "c11_tik").string();
  const auto tik = run_reconstruction(c);
  const auto n_tik = tik.document["result"]["n_coefficients"].get<std::size_t>();
  const std::size_t l = std::size_t(c.sampling.synthetic->n_samples);
  const bool ok = double(tik.sparsity) > 0.9 * double(n_tik) && gtv_run.sparsity <= l;
  return {ok, fmt("tikhonov active %zu of %zu, gTV active %zu (L = %zu)", tik.sparsity, n_tik, gtv_run.sparsity, l)};
}

}  // namespace

int main() {
  const auto root = std::filesystem::temp_directory_path() / "gtv_acceptance";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"wendland construction is exact", 1, wendland_exact},
      {"half-integer matern matches the Bessel oracle", 5, matern_bessel},
      {"fibonacci nodal width", 30, fibonacci_width},
      {"fourier-legendre roundtrip at degree 512", 20, legendre_roundtrip},
      {"prox oracle suite", 10, prox_suite},
      {"pds and apgd agree", 30, solver_agreement},
      {"exact-match solutions are sparse", 60, representer_sparsity},
      {"noiseless reconstruction is consistent", 60, [&] { return noiseless_consistency(root); }},
      {"rkhs projection error decays", 180, rkhs_decay},
      {"poisson counts with the KL cost", 180, poisson_kl},
      {"tikhonov is dense, gTV is sparse", 120, [&] { return tikhonov_contrast(root); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < criteria[i].limit_s;
    failures += !pass;
    std::printf("%s %2zu %s: %s [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs, criteria[i].limit_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
