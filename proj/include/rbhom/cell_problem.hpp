#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include <Eigen/Core>

#include "rbhom/fe.hpp"
#include "rbhom/mesh.hpp"
#include "rbhom/parametrization.hpp"

namespace rbhom {

inline constexpr int kAffineTerms = kBlockCount * kDirections;  // 18
inline constexpr int affine_term(int block, int dir) { return block * kDirections + dir; }

/// Parameter-independent FE blocks of the mapped cell problem.
///
/// Every block stiffness matrix is stored as a value array laid out on the
/// common sparsity pattern of the periodic Laplacian, so assembling K(x) is a
/// linear combination of 18 dense arrays.
class AffineSystem {
 public:
  explicit AffineSystem(PeriodicMesh mesh);

  const PeriodicMesh& mesh() const noexcept { return mesh_; }
  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(mesh_.node_count()); }

  /// M_{k,d} as a standalone sparse matrix (built on demand).
  SparseSpd block_stiffness(int block, Direction dir) const;
  const Vector& block_stiffness_values(int term) const { return stiffness_values_[term]; }
  /// M_term v without materializing the block matrix.
  Vector apply_block(int term, const Vector& v) const;
  /// G_{k,d}[l] = int_{block k} d_d phi_l.
  const Vector& block_load(int block, Direction dir) const {
    return loads_[affine_term(block, static_cast<int>(dir))];
  }
  /// Sum of all blocks: the reference H1-seminorm Gram matrix.
  const SparseSpd& reference_laplacian() const noexcept { return laplacian_; }
  const QuotientSolver& reference_solver() const noexcept { return *reference_solver_; }
  QuotientConstraint constraint() const noexcept { return {}; }

  /// Hash of the mesh size and every assembled payload.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  /// sum_{k,d} weight(k,d) M_{k,d} on the shared pattern.
  SparseSpd combine_stiffness(const std::array<double, kAffineTerms>& weights) const;

 private:
  PeriodicMesh mesh_;
  SparseSpd pattern_;
  std::array<Vector, kAffineTerms> stiffness_values_;
  std::array<Vector, kAffineTerms> loads_;
  SparseSpd laplacian_;
  std::shared_ptr<const QuotientSolver> reference_solver_;
  std::uint64_t fingerprint_ = 0;
};

inline AffineSystem build_affine_system(const PeriodicMesh& mesh) { return AffineSystem(mesh); }

std::array<double, kAffineTerms> stiffness_weights(const AffineCoeffs& coeffs);

struct AssembledCell {
  SparseSpd stiffness;
  std::array<Vector, kDirections> load;
};

/// K(x) = sum c_{k,d} M_{k,d},  F_i(x) = -sum_k chat_{k,i} G_{k,i}.
AssembledCell assemble_at(const AffineSystem& system, const AffineCoeffs& coeffs);
AssembledCell assemble_at(const AffineSystem& system, const CellParam& param);

struct CellSolution {
  AffineCoeffs coeffs;
  std::array<Vector, kDirections> w;
  std::array<Vector, kDirections> load;
  double residual = 0.0;
};

CellSolution solve_cell(const AffineSystem& system, const AffineCoeffs& coeffs,
                        double rel_tol = kDefaultSolveTol);
CellSolution solve_cell(const AffineSystem& system, const CellParam& param,
                        double rel_tol = kDefaultSolveTol);

/// Process-wide number of solve_cell calls (both directions count as one).
std::uint64_t truth_solve_count() noexcept;

struct HomogTensor {
  Eigen::Matrix2d a_star = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  std::optional<Eigen::Matrix2d> bounds;
};

/// s_ij = -F_j . w_i,  a_star = mean * I + s.
HomogTensor homogenized_tensor(const CellSolution& sol);

/// Harmonic and arithmetic means of the scalar two-phase coefficient.
struct VoigtReuss {
  double harmonic;
  double arithmetic;
};
VoigtReuss voigt_reuss(const CellParam& param);

}  // namespace rbhom
