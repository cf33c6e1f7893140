#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rbhom/cell_problem.hpp"
#include "rbhom/parametrization.hpp"

namespace rbhom {

/// One greedy selection: which training parameter and direction was snapshot,
/// and the relative bound that triggered it (infinity for the seed snapshot).
struct Selection {
  std::size_t param_id = 0;
  CellParam param;
  Direction dir = Direction::e1;
  double bound = std::numeric_limits<double>::infinity();
};

/// Orthonormal (reference H1 seminorm) snapshot basis with its projected
/// affine blocks and the Riesz data for N-independent residual norms.
///
/// Riesz representer columns are ordered as the 18 load terms G_{k,d}
/// followed, for each basis vector n, by the 18 stiffness terms M_{k,d} xi_n.
/// They are whitened by the Cholesky factor of the reference Laplacian and
/// orthogonalized incrementally, so that riesz_factor() is upper trapezoidal:
/// the dual norm of a residual with coefficient vector c is ||T c||.
class ReducedBasis {
 public:
  ReducedBasis() = default;
  explicit ReducedBasis(const AffineSystem& system, ParamBox box = {});

  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  int n_per_side() const noexcept { return n_per_side_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  const ParamBox& box() const noexcept { return box_; }

  const std::vector<Vector>& vectors() const noexcept { return vectors_; }
  const Eigen::MatrixXd& reduced_stiffness(int term) const { return stiffness_[term]; }
  const Eigen::MatrixXd& reduced_load(int term) const { return loads_[term]; }  // N x 1
  const Eigen::MatrixXd& riesz_factor() const noexcept { return riesz_factor_; }
  /// Gram matrix of the Riesz representers in the reference inner product.
  Eigen::MatrixXd riesz_gram() const { return riesz_factor_.transpose() * riesz_factor_; }
  const std::vector<Selection>& provenance() const noexcept { return provenance_; }
  const std::vector<std::string>& notices() const noexcept { return notices_; }

  /// Number of Riesz columns used by the first n basis vectors.
  static std::size_t riesz_columns(std::size_t n) { return kAffineTerms * (n + 1); }
  /// Rows of riesz_factor() that are nonzero within the first `columns` columns.
  std::size_t riesz_rows(std::size_t columns) const { return rows_upto_[columns]; }

  /// Appends an already orthonormalized vector. Requires the offline
  /// workspace (not available on a basis read from disk).
  void append(const AffineSystem& system, Vector xi, const Selection& origin);
  void add_notice(std::string notice) { notices_.push_back(std::move(notice)); }

  /// Sum_n coeffs[n] xi_n.
  Vector reconstruct(const Eigen::VectorXd& coeffs) const;

  /// Copy restricted to the first n vectors (nested spaces).
  ReducedBasis truncated(std::size_t n) const;

 private:
  friend class BasisSerializer;
  void add_riesz_column(const Vector& whitened);

  int n_per_side_ = 0;
  std::uint64_t fingerprint_ = 0;
  ParamBox box_;
  std::vector<Vector> vectors_;
  std::array<Eigen::MatrixXd, kAffineTerms> stiffness_;
  std::array<Eigen::MatrixXd, kAffineTerms> loads_;
  Eigen::MatrixXd riesz_factor_;
  std::vector<std::size_t> rows_upto_{0};
  std::vector<Selection> provenance_;
  std::vector<std::string> notices_;
  Eigen::MatrixXd workspace_q_;  // whitened orthonormal columns; offline only
  bool extendable_ = false;
};

/// Result of one reduced query.
struct OnlineResult {
  CellParam param;
  std::size_t n_used = 0;
  std::array<Eigen::VectorXd, kDirections> w;
  Eigen::Matrix2d s_n = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d a_star_n = Eigen::Matrix2d::Identity();
  std::array<double, kDirections> dual_norm{};
  std::array<double, kDirections> delta_w{};
  Eigen::Matrix2d delta_s = Eigen::Matrix2d::Zero();
  double alpha = 1.0;
  double gamma = 1.0;
  bool has_bound = false;

  double w_norm(int i) const { return w[i].norm(); }
};

struct ErrorBound {
  std::array<double, kDirections> dual_norm{};
  std::array<double, kDirections> delta_w{};
  Eigen::Matrix2d delta_s = Eigen::Matrix2d::Zero();
};

/// Galerkin solve in the span of the first n_used basis vectors (all when 0).
/// Never touches an object of the truth dimension.
OnlineResult online_solve(const ReducedBasis& basis, const AffineCoeffs& coeffs,
                          std::size_t n_used = 0, bool with_bound = true);
OnlineResult online_solve(const ReducedBasis& basis, const CellParam& param,
                          std::size_t n_used = 0, bool with_bound = true);

/// delta_w_i = ||r_i||' / alpha,  delta_s_ij = ||r_i||' ||r_j||' / alpha.
ErrorBound error_bound(const ReducedBasis& basis, const AffineCoeffs& coeffs,
                       const std::array<Eigen::VectorXd, kDirections>& w);

/// Residual dual norm computed on the truth mesh: solve the reference
/// Laplacian for the residual representer and take its seminorm.
double direct_dual_norm(const AffineSystem& system, const ReducedBasis& basis,
                        const AffineCoeffs& coeffs, const Eigen::VectorXd& w, Direction dir);

// ---------------------------------------------------------------------------
// Offline greedy

enum class Execution { serial, parallel };

struct GreedyOptions {
  std::size_t n_max = 40;
  double rel_tol = 1e-8;
  Execution execution = Execution::parallel;
};

/// Training-set state at basis size n, and what was selected next.
struct GreedyStep {
  std::size_t n = 0;
  double max_rel_bound = 0.0;
  long selected_param = -1;
  int selected_dir = -1;
};

struct GreedyResult {
  ReducedBasis basis;
  std::vector<GreedyStep> history;
};

inline constexpr double kZeroNorm = 1e-12;

/// Relative bound used for selection; absolute when the reduced solution
/// norm is below kZeroNorm.
inline double selection_bound(double delta_w, double w_norm) {
  return w_norm < kZeroNorm ? delta_w : delta_w / w_norm;
}

GreedyResult greedy_build(const AffineSystem& system, std::span<const CellParam> sample,
                          const GreedyOptions& options = {}, ParamBox box = {});

// ---------------------------------------------------------------------------
// Effectivity audit

struct AuditEntry {
  std::size_t param_id = 0;
  CellParam param;
  int dir = 0;
  std::size_t n = 0;
  double true_err = 0.0;
  double truth_norm = 0.0;
  double bound = 0.0;
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  double s_err = 0.0;    // |s_ii - s^N_ii|
  double s_bound = 0.0;  // delta_s_ii
  double max_s_rel_err = 0.0;  // max_j |s_ij - s^N_ij| / sqrt(|s_ii s_jj|)
  double alpha = 1.0;
  double gamma = 1.0;
  double rel_bound = 0.0;
};

struct AuditSummary {
  std::size_t n = 0;
  double max_rel_bound = 0.0;
  double max_rel_true_err = 0.0;
  double max_rel_s_err = 0.0;
  double min_effectivity = 0.0;
  double max_effectivity = 0.0;
  double median_effectivity = 0.0;
  std::size_t effectivity_count = 0;
  std::size_t violations = 0;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  std::vector<AuditSummary> per_n;
  /// Bracket with the sample-wide constants min alpha, max gamma.
  double global_gamma_over_alpha = 1.0;
  std::vector<std::string> violations;
};

struct AuditOptions {
  std::vector<std::size_t> n_values;  // empty: full basis only
  Execution execution = Execution::parallel;
  bool throw_on_violation = true;
  double bound_slack = 1e-10;
  double effectivity_slack = 1e-6;
};

/// Compares reduced solutions to truth solutions on `test_sample`. Throws
/// BoundViolation when a bound is below the measured error (and
/// throw_on_violation is set).
AuditReport effectivity_audit(const ReducedBasis& basis, const AffineSystem& system,
                              std::span<const CellParam> test_sample,
                              const AuditOptions& options = {});

}  // namespace rbhom
