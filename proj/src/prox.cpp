#include "gtv/prox.hpp"

#include <cmath>
#include <limits>

#include "gtv/errors.hpp"

namespace gtv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRateFloor = 1e-12;

void check_size(const CostModel& m, const Eigen::VectorXd& z, const char* where) {
  if (z.size() != m.size())
    throw InputError(std::string(where) + ": vector length " + std::to_string(z.size()) +
                     " does not match data length " + std::to_string(m.size()));
}

double kl_value(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double floor) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double zi = z[i];
    if (y[i] == 0.0) {
      if (zi < 0.0) {
        if (floor == 0.0) return kInf;
        zi = 0.0;
      }
      s += zi;
      continue;
    }
    if (zi <= floor) {
      if (floor == 0.0) return kInf;
      zi = floor;
    }
    s += zi - y[i] + y[i] * std::log(y[i] / zi);
  }
  return s;
}

}  // namespace

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::exact_match: return "exact";
    case CostKind::l1: return "l1";
    case CostKind::l2_ball: return "l2ball";
    case CostKind::kl: return "kl";
    case CostKind::least_squares: return "ls";
  }
  return "?";
}

CostKind cost_kind_from_string(const std::string& name) {
  if (name == "exact") return CostKind::exact_match;
  if (name == "l1") return CostKind::l1;
  if (name == "l2ball") return CostKind::l2_ball;
  if (name == "kl") return CostKind::kl;
  if (name == "ls") return CostKind::least_squares;
  throw InputError("unknown cost '" + name + "' (expected exact, l1, l2ball, kl or ls)");
}

CostModel::CostModel(CostKind kind, Eigen::VectorXd y, double radius)
    : kind_(kind), y_(std::move(y)), radius_(radius) {
  if (!y_.allFinite()) throw InputError("CostModel: data must be finite");
}

CostModel CostModel::exact_match(Eigen::VectorXd y) { return {CostKind::exact_match, std::move(y), 0.0}; }
CostModel CostModel::l1(Eigen::VectorXd y) { return {CostKind::l1, std::move(y), 0.0}; }
CostModel CostModel::least_squares(Eigen::VectorXd y) { return {CostKind::least_squares, std::move(y), 0.0}; }

CostModel CostModel::l2_ball(Eigen::VectorXd y, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("CostModel: l2 ball radius must be > 0");
  return {CostKind::l2_ball, std::move(y), radius};
}

CostModel CostModel::kl(Eigen::VectorXd y) {
  if ((y.array() < 0.0).any()) throw InputError("CostModel: KL data must be nonnegative");
  return {CostKind::kl, std::move(y), 0.0};
}

double CostModel::value(const Eigen::VectorXd& z) const {
  check_size(*this, z, "CostModel::value");
  switch (kind_) {
    case CostKind::exact_match: return (z - y_).norm() == 0.0 ? 0.0 : kInf;
    case CostKind::l1: return (z - y_).lpNorm<1>();
    // Projections onto the ball land on its boundary only up to rounding.
    case CostKind::l2_ball: return (z - y_).norm() <= radius_ * (1.0 + 1e-12) ? 0.0 : kInf;
    case CostKind::kl: return kl_value(y_, z, 0.0);
    case CostKind::least_squares: return (y_ - z).squaredNorm();
  }
  return kInf;
}

double CostModel::finite_value(const Eigen::VectorXd& z) const {
  check_size(*this, z, "CostModel::finite_value");
  switch (kind_) {
    case CostKind::exact_match:
    case CostKind::l2_ball: return 0.0;
    case CostKind::kl: return kl_value(y_, z, kRateFloor);
    default: return value(z);
  }
}

double CostModel::infeasibility(const Eigen::VectorXd& z) const {
  check_size(*this, z, "CostModel::infeasibility");
  if (kind_ == CostKind::exact_match) return (z - y_).norm();
  if (kind_ == CostKind::l2_ball) return std::max(0.0, (z - y_).norm() - radius_);
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double theta) {
  if (!(theta >= 0.0)) throw InputError("soft_threshold: threshold must be >= 0");
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - theta;
    out[i] = a > 0.0 ? std::copysign(a, z[i]) : 0.0;
  }
  return out;
}

Eigen::VectorXd prox_cost(const CostModel& model, double tau, const Eigen::VectorXd& z) {
  if (!(tau > 0.0)) throw InputError("prox_cost: step must be > 0");
  check_size(model, z, "prox_cost");
  const Eigen::VectorXd& y = model.y();
  switch (model.kind()) {
    case CostKind::exact_match: return y;
    case CostKind::l1: return soft_threshold(z - y, tau) + y;
    case CostKind::l2_ball: {
      const double r = (z - y).norm();
      if (r <= model.radius()) return z;
      return y + (model.radius() / r) * (z - y);
    }
    case CostKind::kl: {
      if (!z.allFinite()) throw InputError("prox_cost: KL prox needs a finite argument");
      Eigen::VectorXd out(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double a = z[i] - tau;
        const double disc = std::sqrt(a * a + 4.0 * y[i] * tau);
        // Rationalised branch avoids cancellation when a is large and negative.
        out[i] = a >= 0.0 ? 0.5 * (a + disc) : (disc - a > 0.0 ? 2.0 * y[i] * tau / (disc - a) : 0.0);
      }
      return out;
    }
    case CostKind::least_squares: return (z + 2.0 * tau * y) / (1.0 + 2.0 * tau);
  }
  throw ContractError("prox_cost: unknown cost");
}

Eigen::VectorXd prox_conjugate(const CostModel& model, double sigma, const Eigen::VectorXd& v) {
  if (!(sigma > 0.0)) throw InputError("prox_conjugate: step must be > 0");
  return v - sigma * prox_cost(model, 1.0 / sigma, v / sigma);
}

Gradient grad_cost(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x) {
  if (!model.smooth())
    throw ContractError("grad_cost: cost '" + to_string(model.kind()) + "' is not differentiable; use the PDS solver");
  if (g.rows() != model.size()) throw InputError("grad_cost: matrix rows do not match data length");
  const double n = spectral_norm(g);
  return {2.0 * g.apply_transpose(g.apply(x) - model.y()), 2.0 * n * n};
}

}  // namespace gtv
