#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "rbhom/mesh.hpp"

namespace rbhom {

using Vector = Eigen::VectorXd;
using SparseSpd = Eigen::SparseMatrix<double>;

enum class Direction : int { e1 = 0, e2 = 1 };
inline constexpr int kDirections = 2;

/// Quotient by constants, realized by fixing one nodal value to zero.
struct QuotientConstraint {
  int pinned_node = 0;
};

inline constexpr double kDefaultSolveTol = 1e-12;

/// Matrix with entries  int_{block} d_dir(phi_i) d_dir(phi_j)  on the reference cell.
SparseSpd assemble_block_stiffness(const PeriodicMesh& mesh, int block, Direction dir);

/// Vector with entries  int_{block} d_dir(phi_l).
Vector assemble_block_load(const PeriodicMesh& mesh, int block, Direction dir);

/// Periodic P1 Laplacian assembled in a single pass over all elements.
SparseSpd assemble_laplacian(const PeriodicMesh& mesh);

/// Cholesky factorization of a periodic pure-Neumann matrix with one pinned
/// node. The pinned row and column are replaced by the identity, so the
/// factored system is definite and has the original dimension.
class QuotientSolver {
 public:
  QuotientSolver(const SparseSpd& matrix, QuotientConstraint constraint = {});

  /// Solves K u = f with u[pinned] = 0. Throws ValidationError when f is not
  /// orthogonal to constants and SolveError when the residual contract
  /// ||K u - f|| <= rel_tol ||f|| cannot be met after iterative refinement.
  Vector solve(const Vector& rhs, double rel_tol = kDefaultSolveTol) const;

  /// Returns L^{-1} P g for the factorization P K~ P^T = L L^T; its Euclidean
  /// norm is the dual norm of g with respect to the K inner product.
  Vector whiten(const Vector& rhs) const;

  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  const SparseSpd& matrix() const noexcept { return matrix_; }
  QuotientConstraint constraint() const noexcept { return constraint_; }

 private:
  SparseSpd matrix_;
  QuotientConstraint constraint_;
  Eigen::SimplicialLLT<SparseSpd> llt_;
};

/// One-shot form of QuotientSolver::solve.
Vector solve_spd(const SparseSpd& matrix, const Vector& rhs, QuotientConstraint constraint = {},
                 double rel_tol = kDefaultSolveTol);

/// u^T K v for the reference Laplacian K (the H1 seminorm inner product).
double h1_semi_inner(const Vector& u, const Vector& v, const SparseSpd& laplacian);

/// Throws ValidationError if rhs has a constant component above 1e-10 (relative to max(1, ||rhs||)).
void check_compatible(const Vector& rhs);

}  // namespace rbhom
