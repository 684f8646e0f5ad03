#include "gtv/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

#include "gtv/errors.hpp"
#include "gtv/parallel.hpp"

namespace gtv {

FunctionalKind kind_of(const SamplingFunctional& f) {
  return std::holds_alternative<DiracSample>(f) ? FunctionalKind::dirac : FunctionalKind::square_integrable;
}

namespace {

void sort_row(SparseRow& row) {
  std::vector<std::size_t> order(row.cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row.cols[a] < row.cols[b]; });
  SparseRow sorted;
  sorted.cols.reserve(order.size());
  sorted.vals.reserve(order.size());
  for (auto i : order) {
    sorted.cols.push_back(row.cols[i]);
    sorted.vals.push_back(row.vals[i]);
  }
  row = std::move(sorted);
}

}  // namespace

SparseRow dirac_row(const ZonalKernel& kernel, const Direction& p, const KnotSet& knots, double abs_cutoff) {
  if (knots.empty()) throw InputError("dirac_row: empty knot set");
  SparseRow row;
  const double t_cut = kernel.cutoff_inner(abs_cutoff);
  auto push = [&](std::size_t n, double t) {
    const double v = kernel(t);
    if (std::abs(v) > abs_cutoff) {
      row.cols.push_back(static_cast<int>(n));
      row.vals.push_back(v);
    }
  };
  if (t_cut > -1.0) {
    knots.index().for_each_within(p, chord_from_inner(t_cut), push);
    sort_row(row);
  } else {
    for (std::size_t n = 0; n < knots.size(); ++n) push(n, p.dot(knots[n]));
  }
  return row;
}

SparseRow patch_row(const ZonalKernel& kernel, const PatchBounds& b, const KnotSet& knots, int q,
                    double abs_cutoff) {
  if (q < 2) throw InputError("patch_row: quadrature order must be >= 2");
  if (knots.empty()) throw InputError("patch_row: empty knot set");
  constexpr double deg = kPi / 180.0;
  const QuadratureRule base = gauss_legendre(q);
  const QuadratureRule lon_rule = base.mapped(b.lon_min * deg, b.lon_max * deg);
  const QuadratureRule u_rule = base.mapped(std::sin(b.lat_min * deg), std::sin(b.lat_max * deg));

  std::vector<Direction> nodes;
  std::vector<double> weights;
  nodes.reserve(static_cast<std::size_t>(q) * q);
  for (int i = 0; i < q; ++i) {
    const double lon = lon_rule.nodes[i];
    for (int j = 0; j < q; ++j) {
      const double u = u_rule.nodes[j];
      const double cl = std::sqrt(std::max(0.0, 1.0 - u * u));
      nodes.emplace_back(cl * std::cos(lon), cl * std::sin(lon), u);
      weights.push_back(lon_rule.weights[i] * u_rule.weights[j]);
    }
  }

  SparseRow row;
  auto integrate = [&](std::size_t n) {
    const Direction& r = knots[n];
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * kernel(nodes[k].dot(r));
    if (sum != 0.0 && std::abs(sum) > abs_cutoff * b.area()) {
      row.cols.push_back(static_cast<int>(n));
      row.vals.push_back(sum);
    }
  };

  const double t_cut = kernel.cutoff_inner(abs_cutoff);
  if (t_cut > -1.0) {
    // Every quadrature node lies within `reach` of the centre, so a knot can only
    // touch a node when it is within reach + support chord of the centre.
    const Direction c = b.centre();
    double reach = 0.0;
    for (const auto& nd : nodes) reach = std::max(reach, chord_distance(c, nd));
    const double radius = std::min(2.0, reach + chord_from_inner(t_cut) + 1e-12);
    std::vector<std::size_t> candidates;
    knots.index().for_each_within(c, radius, [&](std::size_t n, double) { candidates.push_back(n); });
    std::sort(candidates.begin(), candidates.end());
    for (auto n : candidates) integrate(n);
  } else {
    for (std::size_t n = 0; n < knots.size(); ++n) integrate(n);
  }
  return row;
}

// ---------------------------------------------------------------------------

GramMatrix::GramMatrix(int rows, int cols, const std::vector<SparseRow>& row_data) : m_(rows, cols) {
  if (static_cast<int>(row_data.size()) != rows) throw InputError("GramMatrix: row count mismatch");
  std::vector<int> sizes(rows);
  for (int i = 0; i < rows; ++i) sizes[i] = static_cast<int>(row_data[i].cols.size());
  m_.reserve(sizes);
  for (int i = 0; i < rows; ++i) {
    const auto& r = row_data[i];
    for (std::size_t k = 0; k < r.cols.size(); ++k) {
      if (!std::isfinite(r.vals[k])) throw NumericalError("GramMatrix: non-finite entry");
      if (r.cols[k] < 0 || r.cols[k] >= cols) throw InputError("GramMatrix: column index out of range");
      if (k > 0 && r.cols[k] <= r.cols[k - 1]) throw InputError("GramMatrix: columns must increase within a row");
      m_.insert(i, r.cols[k]) = r.vals[k];
    }
  }
  m_.makeCompressed();
}

GramMatrix::GramMatrix(Storage m) : m_(std::move(m)) { m_.makeCompressed(); }

GramMatrix GramMatrix::from_dense(const Eigen::MatrixXd& dense) {
  Storage s = dense.sparseView(0.0, 0.0);
  return GramMatrix(std::move(s));
}

double GramMatrix::density() const {
  const double total = static_cast<double>(m_.rows()) * static_cast<double>(m_.cols());
  return total > 0 ? static_cast<double>(m_.nonZeros()) / total : 0.0;
}

Eigen::VectorXd GramMatrix::apply(const Eigen::VectorXd& x) const {
  if (x.size() != m_.cols()) throw InputError("GramMatrix::apply: size mismatch");
  return m_ * x;
}

Eigen::VectorXd GramMatrix::apply_transpose(const Eigen::VectorXd& z) const {
  if (z.size() != m_.rows()) throw InputError("GramMatrix::apply_transpose: size mismatch");
  return m_.transpose() * z;
}

std::optional<double> GramMatrix::cached_spectral_norm() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->value;
}

GramMatrix assemble_gram(const ZonalKernel& kernel, const std::vector<SamplingFunctional>& functionals,
                         const KnotSet& knots, double abs_cutoff) {
  if (functionals.empty()) throw InputError("assemble_gram: no sampling functionals");
  if (knots.empty()) throw InputError("assemble_gram: empty knot set");
  const FourierSymbol sym = equivalent_symbol(kernel);
  bool has_dirac = false, has_l2 = false;
  for (const auto& f : functionals) (kind_of(f) == FunctionalKind::dirac ? has_dirac : has_l2) = true;
  if (has_dirac && !check_compatibility(sym, FunctionalKind::dirac).compatible)
    throw DomainError("assemble_gram: Dirac sampling needs spectral growth order p > d - 1, kernel has p = " +
                      std::to_string(sym.growth_order()));
  if (has_l2 && !check_compatibility(sym, FunctionalKind::square_integrable).compatible)
    throw DomainError("assemble_gram: square-integrable sampling needs p > (d - 1)/2, kernel has p = " +
                      std::to_string(sym.growth_order()));

  std::vector<SparseRow> rows(functionals.size());
  parallel_for(
      functionals.size(),
      [&](std::size_t l) {
        rows[l] = std::visit(
            [&](const auto& f) -> SparseRow {
              using T = std::decay_t<decltype(f)>;
              if constexpr (std::is_same_v<T, DiracSample>) {
                return dirac_row(kernel, f.direction, knots, abs_cutoff);
              } else {
                return patch_row(kernel, f.bounds, knots, f.quadrature_order, abs_cutoff);
              }
            },
            functionals[l]);
      },
      16);
  return GramMatrix(static_cast<int>(functionals.size()), static_cast<int>(knots.size()), rows);
}

double spectral_norm(const GramMatrix& g, double tol, int max_iter) {
  {
    std::lock_guard lock(g.cache_->mutex);
    if (g.cache_->value && g.cache_->tol <= tol) return *g.cache_->value;
  }
  if (g.nnz() == 0 || g.matrix().norm() == 0.0) throw DomainError("spectral_norm: zero matrix");

  std::mt19937_64 rng(0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(g.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = g.apply_transpose(g.apply(v));
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
    const bool done = it > 0 && std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  const double sigma = std::sqrt(std::max(lambda, 0.0));
  std::lock_guard lock(g.cache_->mutex);
  if (!g.cache_->value || tol < g.cache_->tol) {
    g.cache_->value = sigma;
    g.cache_->tol = tol;
  }
  return *g.cache_->value;
}

Eigen::MatrixXd knot_gram(const ZonalKernel& kernel, const KnotSet& knots) {
  const auto n = static_cast<Eigen::Index>(knots.size());
  Eigen::MatrixXd k(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    k(ii, ii) = kernel(1.0);
    for (Eigen::Index j = 0; j < ii; ++j) {
      const double v = kernel(knots[i].dot(knots[static_cast<std::size_t>(j)]));
      k(ii, j) = v;
      k(j, ii) = v;
    }
  });
  return k;
}

Eigen::MatrixXd knot_gram(const LegendreSeries& series, const KnotSet& knots) {
  const auto n = static_cast<Eigen::Index>(knots.size());
  Eigen::MatrixXd k(n, n);
  const double diag = resynthesize(series, 1.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    k(ii, ii) = diag;
    for (Eigen::Index j = 0; j < ii; ++j) {
      const double t = std::clamp(knots[i].dot(knots[static_cast<std::size_t>(j)]), -1.0, 1.0);
      const double v = resynthesize(series, t);
      k(ii, j) = v;
      k(j, ii) = v;
    }
  });
  return k;
}

}  // namespace gtv
