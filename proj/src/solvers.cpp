#include "gtv/solvers.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>

#include "gtv/errors.hpp"

namespace gtv {

namespace {

void check_common(const GramMatrix& g, const CostModel& model, const SolverConfig& c) {
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InputError("solver: lambda must be >= 0");
  if (!(c.eps_stop > 0.0)) throw InputError("solver: eps_stop must be > 0");
  if (c.max_iter < 1) throw InputError("solver: max_iter must be >= 1");
  if (g.rows() != model.size())
    throw InputError("solver: matrix has " + std::to_string(g.rows()) + " rows but data has " +
                     std::to_string(model.size()) + " entries");
}

Eigen::VectorXd initial(const std::optional<Eigen::VectorXd>& v, Eigen::Index n, const char* name) {
  if (!v) return Eigen::VectorXd::Zero(n);
  if (v->size() != n) throw InputError(std::string("solver: ") + name + " has the wrong length");
  return *v;
}

bool stalled(double step, double prev_norm, double eps) {
  return prev_norm < 1e-30 ? step <= eps : step <= eps * prev_norm;
}

}  // namespace

double objective(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x, double lambda) {
  return model.value(g.apply(x)) + lambda * x.lpNorm<1>();
}

double finite_objective(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x, double lambda) {
  return model.finite_value(g.apply(x)) + lambda * x.lpNorm<1>();
}

SolverResult pds_solve(const GramMatrix& g, const CostModel& model, const SolverConfig& config,
                       std::optional<Eigen::VectorXd> x0, std::optional<Eigen::VectorXd> z0) {
  check_common(g, model, config);
  const double gnorm = spectral_norm(g);
  double tau, sigma;
  if (config.tau && config.sigma) {
    tau = *config.tau;
    sigma = *config.sigma;
  } else if (config.tau) {
    tau = *config.tau;
    sigma = 1.0 / (tau * gnorm * gnorm);
  } else if (config.sigma) {
    sigma = *config.sigma;
    tau = 1.0 / (sigma * gnorm * gnorm);
  } else {
    tau = sigma = 1.0 / gnorm;
  }
  if (!(tau > 0.0) || !(sigma > 0.0)) throw InputError("pds_solve: step sizes must be > 0");
  if (sigma * tau * gnorm * gnorm > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "pds_solve: sigma*tau*|G|^2 = " << sigma * tau * gnorm * gnorm << " exceeds 1";
    throw InputError(msg.str());
  }

  SolverResult r;
  r.tau = tau;
  r.sigma = sigma;
  Eigen::VectorXd x = initial(x0, g.cols(), "x0");
  Eigen::VectorXd z = initial(z0, g.rows(), "z0");
  Eigen::VectorXd gx = g.apply(x);

  for (int n = 1; n <= config.max_iter; ++n) {
    const Eigen::VectorXd x_new = soft_threshold(x - tau * g.apply_transpose(z), config.lambda * tau);
    const Eigen::VectorXd gx_new = g.apply(x_new);
    Eigen::VectorXd z_new = prox_conjugate(model, sigma, z + sigma * (2.0 * gx_new - gx));

    const double step = (x_new - x).norm();
    const double prev = x.norm();
    // At x = 0 the primal step alone says nothing (x_1 = 0 whenever x_0 = z_0 = 0),
    // so the absolute fallback also asks the dual iterate to have settled.
    const bool done = prev < 1e-30 ? step <= config.eps_stop && (z_new - z).norm() <= config.eps_stop
                                   : stalled(step, prev, config.eps_stop);
    x = x_new;
    gx = gx_new;
    z = std::move(z_new);
    r.iterations = n;
    if (config.record_trace) {
      r.objective_trace.push_back(model.finite_value(gx) + config.lambda * x.lpNorm<1>());
      if (model.is_indicator()) r.infeasibility_trace.push_back(model.infeasibility(gx));
    }
    if (!x.allFinite()) throw NumericalError("pds_solve: iterate diverged at iteration " + std::to_string(n));
    if (done) {
      r.converged = true;
      break;
    }
  }
  r.x = std::move(x);
  r.z = std::move(z);
  r.primal_residual = (model.y() - gx).norm();
  return r;
}

SolverResult apgd_solve(const GramMatrix& g, const CostModel& model, const SolverConfig& config,
                        std::optional<Eigen::VectorXd> x0) {
  check_common(g, model, config);
  if (!model.smooth())
    throw ContractError("apgd_solve: cost '" + to_string(model.kind()) + "' is not smooth; use pds_solve");
  if (!(config.theta > 2.0)) throw InputError("apgd_solve: theta must be > 2");
  const double gnorm = spectral_norm(g);
  const double beta = 2.0 * gnorm * gnorm;
  const double tau = config.tau.value_or(1.0 / beta);
  if (!(tau > 0.0) || tau > (1.0 + 1e-12) / beta) throw InputError("apgd_solve: tau must lie in (0, 1/beta]");

  SolverResult r;
  r.tau = tau;
  Eigen::VectorXd x = initial(x0, g.cols(), "x0");
  Eigen::VectorXd z_prev = x;
  Eigen::VectorXd gz = g.apply(z_prev);

  for (int n = 1; n <= config.max_iter; ++n) {
    const Eigen::VectorXd grad = 2.0 * g.apply_transpose(g.apply(x) - model.y());
    Eigen::VectorXd z = soft_threshold(x - tau * grad, config.lambda * tau);
    const double momentum = (n - 1.0) / (n + config.theta);
    Eigen::VectorXd x_new = z + momentum * (z - z_prev);

    const bool done = stalled((x_new - x).norm(), x.norm(), config.eps_stop);
    x = std::move(x_new);
    z_prev = std::move(z);
    r.iterations = n;
    if (config.record_trace || done || n == config.max_iter) gz = g.apply(z_prev);
    if (config.record_trace) r.objective_trace.push_back(model.finite_value(gz) + config.lambda * z_prev.lpNorm<1>());
    if (!x.allFinite()) throw NumericalError("apgd_solve: iterate diverged at iteration " + std::to_string(n));
    if (done) {
      r.converged = true;
      break;
    }
  }
  r.x = std::move(z_prev);
  r.primal_residual = (model.y() - gz).norm();
  return r;
}

Eigen::VectorXd tikhonov_solve(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double mu, double cg_tol,
                               int cg_maxiter) {
  if (k.rows() != k.cols() || k.rows() != y.size()) throw InputError("tikhonov_solve: size mismatch");
  if (!(mu > 0.0)) throw InputError("tikhonov_solve: mu must be > 0");
  if (!k.isApprox(k.transpose(), 1e-12)) throw InputError("tikhonov_solve: matrix is not symmetric");
  const Eigen::MatrixXd a = k + mu * Eigen::MatrixXd::Identity(k.rows(), k.cols());
  Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg;
  cg.setTolerance(cg_tol);
  cg.setMaxIterations(cg_maxiter);
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(y);
  if (cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "tikhonov_solve: CG did not converge in " << cg.iterations() << " iterations (relative residual "
        << cg.error() << ", target " << cg_tol << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

SplineField rkhs_project(const ZonalKernel& kernel, const KnotSet& knots, const Eigen::VectorXd& samples) {
  if (samples.size() != static_cast<Eigen::Index>(knots.size()))
    throw InputError("rkhs_project: one sample per knot required");
  const Eigen::MatrixXd k = knot_gram(kernel, knots);
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw InputError("rkhs_project: knot Gram matrix is not positive definite");
  return synthesize(kernel, knots, llt.solve(samples));
}

}  // namespace gtv
