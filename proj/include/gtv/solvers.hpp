#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gtv/prox.hpp"
#include "gtv/sampling.hpp"
#include "gtv/spline.hpp"

namespace gtv {

struct SolverConfig {
  double lambda = 1.0;
  double eps_stop = 1e-4;
  int max_iter = 10000;
  std::optional<double> tau;
  std::optional<double> sigma;
  double theta = 75.0;  // APGD inertia denominator
  bool record_trace = true;
};

struct SolverResult {
  Eigen::VectorXd x;
  Eigen::VectorXd z;  // dual iterate (PDS only)
  int iterations = 0;
  std::vector<double> objective_trace;      // F(y, Gx) + lambda |x|_1, finite variant
  std::vector<double> infeasibility_trace;  // distance of Gx to an indicator's feasible set
  bool converged = false;
  double primal_residual = 0.0;  // |y - Gx|
  double tau = 0.0;
  double sigma = 0.0;
};

/// F(y, Gx) + lambda |x|_1; +inf outside the cost's domain.
double objective(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x, double lambda);

/// Same with CostModel::finite_value.
double finite_objective(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x, double lambda);

/// Primal-dual splitting for min F(y, Gx) + lambda |x|_1.
SolverResult pds_solve(const GramMatrix& g, const CostModel& model, const SolverConfig& config,
                       std::optional<Eigen::VectorXd> x0 = std::nullopt,
                       std::optional<Eigen::VectorXd> z0 = std::nullopt);

/// Accelerated proximal gradient descent for the least-squares cost. The
/// returned x is the last thresholded iterate.
SolverResult apgd_solve(const GramMatrix& g, const CostModel& model, const SolverConfig& config,
                        std::optional<Eigen::VectorXd> x0 = std::nullopt);

/// Solves (K + mu I) x = y by conjugate gradients.
Eigen::VectorXd tikhonov_solve(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double mu,
                               double cg_tol = 1e-10, int cg_maxiter = 10000);

/// Kernel interpolant of the samples h(r_n) at the knots.
SplineField rkhs_project(const ZonalKernel& kernel, const KnotSet& knots, const Eigen::VectorXd& samples);

}  // namespace gtv
