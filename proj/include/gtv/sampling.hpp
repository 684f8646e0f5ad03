#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gtv/kernels.hpp"
#include "gtv/pdo.hpp"
#include "gtv/sphere.hpp"

namespace gtv {

struct DiracSample {
  Direction direction;
};

/// Integral of the field over a lon/lat patch, by a Q x Q Gauss rule in (lon, sin lat).
struct PatchSample {
  PatchBounds bounds;
  int quadrature_order = 8;
};

using SamplingFunctional = std::variant<DiracSample, PatchSample>;

FunctionalKind kind_of(const SamplingFunctional& f);

struct SparseRow {
  std::vector<int> cols;  // strictly increasing
  std::vector<double> vals;
};

inline constexpr double kDefaultAbsCutoff = 1e-12;
inline constexpr int kDefaultPatchQuadrature = 8;

/// Row n -> psi(<p, r_n>), dropping entries with |value| <= abs_cutoff.
SparseRow dirac_row(const ZonalKernel& kernel, const Direction& p, const KnotSet& knots,
                    double abs_cutoff = kDefaultAbsCutoff);

/// Row n -> int_B psi(<r, r_n>) dr. Knots farther than the kernel's support (or
/// its abs_cutoff radius) from every quadrature node are skipped.
SparseRow patch_row(const ZonalKernel& kernel, const PatchBounds& b, const KnotSet& knots,
                    int q = kDefaultPatchQuadrature, double abs_cutoff = 0.0);

/// Sparse L x N system matrix in compressed row storage.
class GramMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  GramMatrix() = default;
  GramMatrix(int rows, int cols, const std::vector<SparseRow>& row_data);
  explicit GramMatrix(Storage m);
  static GramMatrix from_dense(const Eigen::MatrixXd& dense);

  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  long nnz() const { return static_cast<long>(m_.nonZeros()); }
  double density() const;
  const Storage& matrix() const { return m_; }
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;            // G x
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& z) const;  // G^T z

  std::optional<double> cached_spectral_norm() const;

 private:
  friend double spectral_norm(const GramMatrix&, double, int);
  struct NormCache {
    std::mutex mutex;
    std::optional<double> value;
    double tol = 1.0;
  };

  Storage m_;
  std::shared_ptr<NormCache> cache_ = std::make_shared<NormCache>();
};

/// Rows assembled independently; throws DomainError when the kernel's operator
/// is too weak for one of the functional kinds present.
GramMatrix assemble_gram(const ZonalKernel& kernel, const std::vector<SamplingFunctional>& functionals,
                         const KnotSet& knots, double abs_cutoff = kDefaultAbsCutoff);

/// Largest singular value by power iteration on G^T G (fixed seed 0). The
/// result is cached on the matrix.
double spectral_norm(const GramMatrix& g, double tol = 1e-12, int max_iter = 20000);

/// Dense symmetric matrix K_mn = psi(<r_m, r_n>).
Eigen::MatrixXd knot_gram(const ZonalKernel& kernel, const KnotSet& knots);
/// Same with an unnormalised series (for instance psi * psi from self_convolve).
Eigen::MatrixXd knot_gram(const LegendreSeries& series, const KnotSet& knots);

}  // namespace gtv
