#include <cmath>
#include <random>

#include "doctest.h"
#include "gtv/errors.hpp"
#include "gtv/solvers.hpp"

using namespace gtv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

GramMatrix dense(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return GramMatrix::from_dense(m);
}

Eigen::MatrixXd gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = g(rng) / std::sqrt(double(r));
  return a;
}

SolverConfig tight(double lambda, int max_iter = 200000) {
  SolverConfig c;
  c.lambda = lambda;
  c.eps_stop = 1e-12;
  c.max_iter = max_iter;
  return c;
}

}  // namespace

TEST_CASE("pds examples") {
  auto r1 = pds_solve(dense({{1.0}}), CostModel::l2_ball(vec({1.0}), 0.1), tight(1.0));
  CHECK(r1.x[0] == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(r1.converged);

  auto r2 = pds_solve(dense({{1.0, 1.0}}), CostModel::exact_match(vec({2.0})), tight(1.0));
  CHECK(r2.x.lpNorm<1>() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r2.x.sum() == doctest::Approx(2.0).epsilon(1e-8));

  auto r3 = pds_solve(dense({{1.0, 0.5}, {0.2, 1.0}}), CostModel::exact_match(vec({0.0, 0.0})), tight(1.0));
  CHECK(r3.x.norm() == 0.0);
  CHECK(r3.converged);
}

TEST_CASE("pds step rules") {
  auto g = dense({{3.0, 0.0}, {0.0, 1.0}});
  auto m = CostModel::exact_match(vec({1.0, 1.0}));
  SolverConfig c;
  c.max_iter = 3;
  auto auto_steps = pds_solve(g, m, c);
  CHECK(auto_steps.tau == doctest::Approx(1.0 / 3.0));
  CHECK(auto_steps.sigma == doctest::Approx(1.0 / 3.0));
  c.tau = 0.1;
  auto one = pds_solve(g, m, c);
  // sigma tau |G|^2 = 1 exactly
  CHECK(one.sigma * one.tau * 9.0 == doctest::Approx(1.0).epsilon(1e-12));
  c.sigma = 2.0;
  CHECK_THROWS_AS(pds_solve(g, m, c), InputError);
  c.tau.reset();
  c.sigma.reset();
  c.lambda = -1.0;
  CHECK_THROWS_AS(pds_solve(g, m, c), InputError);
  c.lambda = 1.0;
  CHECK_THROWS_AS(pds_solve(g, CostModel::exact_match(vec({1.0})), c), InputError);
  CHECK_THROWS_AS(pds_solve(g, m, c, vec({1.0})), InputError);
}

TEST_CASE("apgd examples") {
  auto g = dense({{1.0}});
  auto m = CostModel::least_squares(vec({1.0}));
  CHECK(apgd_solve(g, m, tight(1.0)).x[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(apgd_solve(g, m, tight(2.0)).x[0] == 0.0);
  CHECK(apgd_solve(g, m, tight(5.0)).x[0] == 0.0);
  CHECK(apgd_solve(g, m, tight(0.0)).x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(apgd_solve(g, m, tight(1.0)).tau == doctest::Approx(0.5));

  SolverConfig c = tight(1.0);
  c.theta = 2.0;
  CHECK_THROWS_AS(apgd_solve(g, m, c), InputError);
  c.theta = 75.0;
  c.tau = 0.6;
  CHECK_THROWS_AS(apgd_solve(g, m, c), InputError);
  CHECK_THROWS_AS(apgd_solve(g, CostModel::kl(vec({1.0})), tight(1.0)), ContractError);
  CHECK_THROWS_AS(apgd_solve(g, CostModel::exact_match(vec({1.0})), tight(1.0)), ContractError);
}

TEST_CASE("pds and apgd agree on lasso instances") {
  for (unsigned seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd a = gaussian(30, 60, rng);
    Eigen::VectorXd x_true = Eigen::VectorXd::Zero(60);
    for (int i = 0; i < 5; ++i) x_true[(i * 11 + int(seed)) % 60] = i % 2 ? 1.0 : -1.5;
    std::normal_distribution<double> noise(0.0, 0.01);
    Eigen::VectorXd y = a * x_true;
    for (int i = 0; i < 30; ++i) y[i] += noise(rng);
    const auto g = GramMatrix::from_dense(a);
    const auto m = CostModel::least_squares(y);
    const double lambda = 0.05;
    auto p = pds_solve(g, m, tight(lambda));
    auto q = apgd_solve(g, m, tight(lambda));
    const double fp = objective(m, g, p.x, lambda), fq = objective(m, g, q.x, lambda);
    CHECK(std::abs(fp - fq) <= 1e-6 * std::abs(fq));
    CHECK((p.x - q.x).norm() <= 1e-3 * q.x.norm());
    // Support recovery at this noise level.
    for (int i = 0; i < 60; ++i)
      if (x_true[i] != 0.0) CHECK(std::abs(q.x[i]) > 0.5);
  }
}

TEST_CASE("apgd makes progress with few iterations") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd a = gaussian(40, 80, rng);
  Eigen::VectorXd y = a * Eigen::VectorXd::LinSpaced(80, -1, 1);
  const auto g = GramMatrix::from_dense(a);
  const auto m = CostModel::least_squares(y);
  SolverConfig c = tight(0.1, 50);
  auto r = apgd_solve(g, m, c);
  REQUIRE(r.objective_trace.size() == 50);
  const double best = objective(m, g, apgd_solve(g, m, tight(0.1)).x, 0.1);
  CHECK(r.objective_trace.back() - best < 0.1 * (r.objective_trace.front() - best));
  CHECK(r.objective_trace.back() < objective(m, g, Eigen::VectorXd::Zero(80), 0.1));
}

TEST_CASE("pds with exact match fits the data and is sparse") {
  for (unsigned seed : {4u, 5u, 6u}) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd a = gaussian(15, 50, rng);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) y[i] = g(rng);
    const auto gm = GramMatrix::from_dense(a);
    auto r = pds_solve(gm, CostModel::exact_match(y), tight(1.0));
    CHECK(r.primal_residual <= 1e-6 * y.norm());
    CHECK(r.infeasibility_trace.back() == doctest::Approx(r.primal_residual));
    CHECK(sparsity_report(r.x, 1e-4).count <= 15);
  }
}

TEST_CASE("l2 ball solutions sit on the ball boundary") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd a = gaussian(20, 40, rng);
  Eigen::VectorXd y = a.col(3) - 2 * a.col(17);
  const auto g = GramMatrix::from_dense(a);
  const double rho = 0.05 * y.norm();
  auto r = pds_solve(g, CostModel::l2_ball(y, rho), tight(1.0));
  CHECK(r.primal_residual == doctest::Approx(rho).epsilon(1e-5));
  CHECK(r.x.lpNorm<1>() < 3.0);
}

TEST_CASE("tikhonov examples") {
  Eigen::MatrixXd k(2, 2);
  k << 2, 1, 1, 2;
  auto x = tikhonov_solve(k, vec({1.0, 0.0}), 1.0);
  CHECK(x[0] == doctest::Approx(3.0 / 8.0).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(-1.0 / 8.0).epsilon(1e-9));

  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  auto z = tikhonov_solve(id, vec({2.0, 4.0, -6.0}), 1.0);
  CHECK(z[1] == doctest::Approx(2.0));

  Eigen::MatrixXd ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS_AS(tikhonov_solve(ns, vec({1.0, 0.0}), 1.0), InputError);
  CHECK_THROWS_AS(tikhonov_solve(k, vec({1.0, 0.0}), 0.0), InputError);
  CHECK_THROWS_AS(tikhonov_solve(k, vec({1.0}), 1.0), InputError);

  std::mt19937_64 rng(1);
  Eigen::MatrixXd b = gaussian(60, 60, rng);
  Eigen::MatrixXd spd = b * b.transpose();
  CHECK_THROWS_AS(tikhonov_solve(spd, Eigen::VectorXd::Ones(60), 1e-9, 1e-14, 2), NumericalError);
  Eigen::VectorXd s = tikhonov_solve(spd, Eigen::VectorXd::Ones(60), 0.1);
  Eigen::VectorXd oracle = (spd + 0.1 * Eigen::MatrixXd::Identity(60, 60)).llt().solve(Eigen::VectorXd::Ones(60));
  CHECK((s - oracle).norm() <= 1e-8 * oracle.norm());
}

TEST_CASE("rkhs projection interpolates") {
  auto knots = fibonacci_lattice(120);
  auto kernel = matern_zonal(2.5, 0.3);
  Eigen::VectorXd h(120);
  for (int n = 0; n < 120; ++n) h[n] = std::exp(knots[n].x()) - knots[n].z();
  auto f = rkhs_project(kernel, knots, h);
  CHECK((evaluate(f, knots.knots()) - h).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(rkhs_project(kernel, knots, Eigen::VectorXd::Ones(3)), InputError);

  KnotSet one({Direction(0, 0, 1)});
  CHECK(rkhs_project(kernel, one, vec({2.5})).coeffs()[0] == doctest::Approx(2.5));
}

TEST_CASE("rkhs projection error decays with the knot count") {
  auto kernel = matern_zonal(2.5, 0.3);
  auto h = [](const Direction& r) { return std::exp(r.x()) - r.z() * r.y(); };
  auto probes = fibonacci_lattice(4001).knots();
  double prev = 1e300;
  for (std::size_t n : {50u, 200u, 800u}) {
    auto knots = fibonacci_lattice(n);
    Eigen::VectorXd s(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) s[static_cast<Eigen::Index>(i)] = h(knots[i]);
    auto f = rkhs_project(kernel, knots, s);
    auto v = evaluate(f, probes);
    double err = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) err = std::max(err, std::abs(v[static_cast<Eigen::Index>(i)] - h(probes[i])));
    CHECK(err < 0.6 * prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}
