#include "gtv/spline.hpp"

#include <cmath>

#include "gtv/errors.hpp"
#include "gtv/parallel.hpp"

namespace gtv {

SplineField::SplineField(ZonalKernel kernel, KnotSet knots, Eigen::VectorXd coeffs)
    : kernel_(std::move(kernel)), knots_(std::move(knots)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != knots_.size())
    throw InputError("SplineField: " + std::to_string(coeffs_.size()) + " coefficients for " +
                     std::to_string(knots_.size()) + " knots");
  if (!coeffs_.allFinite()) throw InputError("SplineField: coefficients must be finite");
}

SplineField synthesize(ZonalKernel kernel, KnotSet knots, Eigen::VectorXd coeffs) {
  return SplineField(std::move(kernel), std::move(knots), std::move(coeffs));
}

double evaluate(const SplineField& field, const Direction& target) {
  const auto& k = field.kernel();
  const auto& x = field.coeffs();
  double sum = 0.0;
  if (auto tmin = k.support_tmin()) {
    // Cap of chord radius sqrt(2 - 2 tmin) holds every knot with <r, r_n> >= tmin.
    field.knots().index().for_each_within(target, chord_from_inner(*tmin), [&](std::size_t n, double t) {
      if (t > *tmin) sum += x[static_cast<Eigen::Index>(n)] * k(t);
    });
    return sum;
  }
  for (std::size_t n = 0; n < field.size(); ++n) sum += x[static_cast<Eigen::Index>(n)] * k(target.dot(field.knots()[n]));
  return sum;
}

Eigen::VectorXd evaluate(const SplineField& field, const std::vector<Direction>& targets) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  if (field.size() == 0) return Eigen::VectorXd::Zero(out.size());
  parallel_for(targets.size(), [&](std::size_t i) { out[static_cast<Eigen::Index>(i)] = evaluate(field, targets[i]); });
  return out;
}

Eigen::VectorXd evaluate_naive(const SplineField& field, const std::vector<Direction>& targets) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t n = 0; n < field.size(); ++n)
      out[static_cast<Eigen::Index>(i)] +=
          field.coeffs()[static_cast<Eigen::Index>(n)] * field.kernel()(targets[i].dot(field.knots()[n]));
  return out;
}

double gtv_norm(const SplineField& field) { return field.coeffs().lpNorm<1>(); }

double native_norm(const SplineField& field, const Eigen::MatrixXd& knot_gram) {
  const auto& c = field.coeffs();
  if (knot_gram.rows() != c.size() || knot_gram.cols() != c.size())
    throw InputError("native_norm: Gram size does not match coefficient count");
  const double q = c.dot(knot_gram * c);
  // Rounding can push an exact zero slightly negative.
  const double scale = c.squaredNorm() * knot_gram.diagonal().cwiseAbs().maxCoeff();
  if (q < -1e-12 * scale) throw NumericalError("native_norm: negative quadratic form " + std::to_string(q));
  return std::sqrt(std::max(q, 0.0));
}

SparsityReport sparsity_report(const Eigen::VectorXd& coeffs, double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) throw InputError("sparsity_report: threshold must be in (0, 1)");
  SparsityReport r;
  if (coeffs.size() == 0) return r;
  const double cut = rel_threshold * coeffs.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    if (std::abs(coeffs[i]) > cut) r.indices.push_back(static_cast<std::size_t>(i));
  r.count = r.indices.size();
  return r;
}

SparsityReport sparsity_report(const SplineField& field, double rel_threshold) {
  return sparsity_report(field.coeffs(), rel_threshold);
}

}  // namespace gtv
