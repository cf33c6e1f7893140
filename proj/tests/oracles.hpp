#pragma once

// Reference computations for the tests. Everything here works from node
// coordinates and textbook formulas rather than from library internals.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "rbhom/mesh.hpp"

namespace oracle {

/// Unwrapped vertex coordinates of a periodic mesh element.
inline std::array<Eigen::Vector2d, 3> vertices(const rbhom::PeriodicMesh& mesh, std::size_t e) {
  const auto& t = mesh.elements()[e];
  const double h = mesh.h();
  const int i = t.cell_i;
  const int j = t.cell_j;
  if (!t.upper) {
    return {Eigen::Vector2d(i * h, j * h), Eigen::Vector2d((i + 1) * h, j * h), Eigen::Vector2d(i * h, (j + 1) * h)};
  }
  return {Eigen::Vector2d((i + 1) * h, j * h), Eigen::Vector2d((i + 1) * h, (j + 1) * h),
          Eigen::Vector2d(i * h, (j + 1) * h)};
}

/// Gradients of the barycentric coordinates of a triangle, columns per vertex,
/// and its area.
inline Eigen::Matrix<double, 2, 3> hat_gradients(const std::array<Eigen::Vector2d, 3>& v, double& area) {
  Eigen::Matrix2d J;
  J.col(0) = v[1] - v[0];
  J.col(1) = v[2] - v[0];
  area = 0.5 * std::abs(J.determinant());
  const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
  Eigen::Matrix<double, 2, 3> g;
  g.col(1) = Jinv_t.col(0);
  g.col(2) = Jinv_t.col(1);
  g.col(0) = -g.col(1) - g.col(2);
  return g;
}

}  // namespace oracle
