#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gtv/kernels.hpp"
#include "gtv/sphere.hpp"

namespace gtv {

/// f(r) = sum_n x_n psi(<r, r_n>).
class SplineField {
 public:
  SplineField(ZonalKernel kernel, KnotSet knots, Eigen::VectorXd coeffs);

  const ZonalKernel& kernel() const { return kernel_; }
  const KnotSet& knots() const { return knots_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  std::size_t size() const { return knots_.size(); }

 private:
  ZonalKernel kernel_;
  KnotSet knots_;
  Eigen::VectorXd coeffs_;
};

SplineField synthesize(ZonalKernel kernel, KnotSet knots, Eigen::VectorXd coeffs);

/// Values at the targets. Compact kernels only visit knots inside the support cap.
Eigen::VectorXd evaluate(const SplineField& field, const std::vector<Direction>& targets);
double evaluate(const SplineField& field, const Direction& target);

/// Same sum over every knot, without pruning.
Eigen::VectorXd evaluate_naive(const SplineField& field, const std::vector<Direction>& targets);

/// |x|_1.
double gtv_norm(const SplineField& field);

/// sqrt(c^T K c) with K the knot Gram of the field's kernel.
double native_norm(const SplineField& field, const Eigen::MatrixXd& knot_gram);

struct SparsityReport {
  std::size_t count = 0;
  std::vector<std::size_t> indices;
};

/// Entries with |x_i| > rel_threshold * max|x|.
SparsityReport sparsity_report(const Eigen::VectorXd& coeffs, double rel_threshold);
SparsityReport sparsity_report(const SplineField& field, double rel_threshold);

}  // namespace gtv
