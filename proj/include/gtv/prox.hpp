#pragma once

#include <string>

#include <Eigen/Dense>

#include "gtv/sampling.hpp"

namespace gtv {

enum class CostKind { exact_match, l1, l2_ball, kl, least_squares };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& name);

/// Data fidelity F(y, z) anchored at measurements y.
class CostModel {
 public:
  static CostModel exact_match(Eigen::VectorXd y);
  static CostModel l1(Eigen::VectorXd y);
  static CostModel l2_ball(Eigen::VectorXd y, double radius);
  static CostModel kl(Eigen::VectorXd y);
  static CostModel least_squares(Eigen::VectorXd y);

  CostKind kind() const { return kind_; }
  const Eigen::VectorXd& y() const { return y_; }
  double radius() const { return radius_; }
  Eigen::Index size() const { return y_.size(); }
  bool smooth() const { return kind_ == CostKind::least_squares; }
  bool is_indicator() const { return kind_ == CostKind::exact_match || kind_ == CostKind::l2_ball; }

  /// F(y, z), +inf outside the domain of indicator and KL costs.
  double value(const Eigen::VectorXd& z) const;

  /// Version of value() that stays finite: indicators contribute 0 and KL rates
  /// are floored at 1e-12. Used for objective traces.
  double finite_value(const Eigen::VectorXd& z) const;

  /// Distance to the feasible set of indicator costs, 0 for the others.
  double infeasibility(const Eigen::VectorXd& z) const;

 private:
  CostModel(CostKind kind, Eigen::VectorXd y, double radius);

  CostKind kind_;
  Eigen::VectorXd y_;
  double radius_ = 0.0;
};

/// Elementwise sign(z) max(|z| - theta, 0).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double theta);

/// argmin_x F(y, x) + |x - z|^2 / (2 tau).
Eigen::VectorXd prox_cost(const CostModel& model, double tau, const Eigen::VectorXd& z);

/// Prox of sigma F*, from prox_cost through Moreau's identity.
Eigen::VectorXd prox_conjugate(const CostModel& model, double sigma, const Eigen::VectorXd& v);

struct Gradient {
  Eigen::VectorXd gradient;
  double lipschitz;
};

/// Gradient of x -> F(y, Gx) for the least-squares cost, with its Lipschitz constant 2|G|^2.
Gradient grad_cost(const CostModel& model, const GramMatrix& g, const Eigen::VectorXd& x);

}  // namespace gtv
