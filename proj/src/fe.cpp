#include "rbhom/fe.hpp"

#include <cmath>
#include <vector>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

using Triplet = Eigen::Triplet<double>;

template <typename Weight>
SparseSpd assemble_stiffness(const PeriodicMesh& mesh, Weight&& weight) {
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.element_count() * 9);
  const double area = mesh.element_area();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto grads = mesh.local_gradients(e);
    const auto& nodes = mesh.elements()[e].nodes;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double v = area * weight(e, grads[a], grads[b]);
        if (v != 0.0) triplets.emplace_back(nodes[a], nodes[b], v);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  SparseSpd k(n, n);
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.makeCompressed();
  return k;
}

}  // namespace

SparseSpd assemble_block_stiffness(const PeriodicMesh& mesh, int block, Direction dir) {
  if (block < 0 || block >= kBlockCount) throw ValidationError("block index out of range");
  const int d = static_cast<int>(dir);
  return assemble_stiffness(mesh, [&](std::size_t e, const auto& ga, const auto& gb) {
    return mesh.block_of_element(e) == block ? ga[d] * gb[d] : 0.0;
  });
}

SparseSpd assemble_laplacian(const PeriodicMesh& mesh) {
  return assemble_stiffness(mesh, [](std::size_t, const auto& ga, const auto& gb) {
    return ga[0] * gb[0] + ga[1] * gb[1];
  });
}

Vector assemble_block_load(const PeriodicMesh& mesh, int block, Direction dir) {
  if (block < 0 || block >= kBlockCount) throw ValidationError("block index out of range");
  const int d = static_cast<int>(dir);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
  const double area = mesh.element_area();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (mesh.block_of_element(e) != block) continue;
    const auto grads = mesh.local_gradients(e);
    const auto& nodes = mesh.elements()[e].nodes;
    for (int a = 0; a < 3; ++a) g[nodes[a]] += area * grads[a][d];
  }
  return g;
}

void check_compatible(const Vector& rhs) {
  if (rhs.size() == 0) return;
  const double constant_component = std::abs(rhs.sum()) / std::sqrt(static_cast<double>(rhs.size()));
  if (constant_component > 1e-10 * std::max(1.0, rhs.norm())) {
    throw ValidationError("right-hand side is not orthogonal to constants (component " +
                          std::to_string(constant_component) + ")");
  }
}

QuotientSolver::QuotientSolver(const SparseSpd& matrix, QuotientConstraint constraint)
    : matrix_(matrix), constraint_(constraint) {
  if (matrix.rows() != matrix.cols()) throw ValidationError("matrix is not square");
  if (constraint.pinned_node < 0 || constraint.pinned_node >= matrix.rows()) {
    throw ValidationError("pinned node out of range");
  }
  SparseSpd pinned = matrix;
  const int p = constraint.pinned_node;
  for (Eigen::Index col = 0; col < pinned.outerSize(); ++col) {
    for (SparseSpd::InnerIterator it(pinned, col); it; ++it) {
      if (it.row() == p || it.col() == p) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
    }
  }
  llt_.compute(pinned);
  if (llt_.info() != Eigen::Success) {
    throw SolveError("Cholesky factorization of the pinned system failed", 1.0);
  }
}

Vector QuotientSolver::solve(const Vector& rhs, double rel_tol) const {
  if (rhs.size() != matrix_.rows()) throw ValidationError("rhs dimension mismatch");
  check_compatible(rhs);
  // The admissible constant component left by roundoff is removed so that the
  // contract is measured on the compatible part of the data.
  const Vector g = (rhs.array() - rhs.mean()).matrix();
  const double fnorm = g.norm();
  if (fnorm == 0.0) return Vector::Zero(rhs.size());

  Vector f = g;
  f[constraint_.pinned_node] = 0.0;
  Vector u = llt_.solve(f);
  u[constraint_.pinned_node] = 0.0;
  double rel = (matrix_ * u - g).norm() / fnorm;
  for (int pass = 0; pass < 3 && rel > rel_tol; ++pass) {
    Vector r = g - matrix_ * u;
    r[constraint_.pinned_node] = 0.0;
    Vector du = llt_.solve(r);
    du[constraint_.pinned_node] = 0.0;
    u += du;
    rel = (matrix_ * u - g).norm() / fnorm;
  }
  if (!(rel <= rel_tol)) throw SolveError("quotient solve missed its residual target", rel);
  return u;
}

Vector QuotientSolver::whiten(const Vector& rhs) const {
  Vector f = rhs;
  f[constraint_.pinned_node] = 0.0;
  Vector pf = llt_.permutationP() * f;
  return llt_.matrixL().solve(pf);
}

Vector solve_spd(const SparseSpd& matrix, const Vector& rhs, QuotientConstraint constraint,
                 double rel_tol) {
  return QuotientSolver(matrix, constraint).solve(rhs, rel_tol);
}

double h1_semi_inner(const Vector& u, const Vector& v, const SparseSpd& laplacian) {
  if (u.size() != v.size() || u.size() != laplacian.rows()) {
    throw ValidationError("h1_semi_inner: dimension mismatch");
  }
  return u.dot(laplacian * v);
}

}  // namespace rbhom
