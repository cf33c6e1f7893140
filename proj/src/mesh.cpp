#include "rbhom/mesh.hpp"

#include <cmath>
#include <string>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

int band_of(double y) noexcept {
  if (y < 0.25) return 0;
  if (y < 0.75) return 1;
  return 2;
}

}  // namespace

int block_of_point(Point2 y) noexcept { return block_index(band_of(y.x1), band_of(y.x2)); }

PeriodicMesh::PeriodicMesh(int n_per_side) : n_(n_per_side) {
  if (n_per_side < 4 || n_per_side % 4 != 0) {
    throw ValidationError("n_per_side must be a positive multiple of 4, got " +
                          std::to_string(n_per_side));
  }
  elements_.reserve(2 * node_count());
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      elements_.push_back({{node(i, j), node(i + 1, j), node(i, j + 1)}, false, i, j});
      elements_.push_back({{node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)}, true, i, j});
    }
  }
  block_of_element_.resize(elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    block_of_element_[e] = block_of_point(barycenter(e));
  }
}

int PeriodicMesh::node(int i, int j) const noexcept {
  const int ii = ((i % n_) + n_) % n_;
  const int jj = ((j % n_) + n_) % n_;
  return jj * n_ + ii;
}

Point2 PeriodicMesh::node_coords(int node) const noexcept {
  return {static_cast<double>(node % n_) / n_, static_cast<double>(node / n_) / n_};
}

std::array<std::array<double, 2>, 3> PeriodicMesh::local_gradients(std::size_t e) const noexcept {
  const double g = static_cast<double>(n_);
  if (!elements_[e].upper) {
    return {{{-g, -g}, {g, 0.0}, {0.0, g}}};
  }
  return {{{0.0, -g}, {g, g}, {-g, 0.0}}};
}

Point2 PeriodicMesh::barycenter(std::size_t e) const noexcept {
  const auto& t = elements_[e];
  const double h = 1.0 / n_;
  const double off = t.upper ? 2.0 / 3.0 : 1.0 / 3.0;
  return {(t.cell_i + off) * h, (t.cell_j + off) * h};
}

double PeriodicMesh::interpolate(const Eigen::VectorXd& u, Point2 y) const {
  double s = y.x1 * n_;
  double t = y.x2 * n_;
  const int i = static_cast<int>(std::floor(s));
  const int j = static_cast<int>(std::floor(t));
  s -= i;
  t -= j;
  const double u00 = u[node(i, j)];
  const double u10 = u[node(i + 1, j)];
  const double u01 = u[node(i, j + 1)];
  if (s + t <= 1.0) {
    return u00 * (1.0 - s - t) + u10 * s + u01 * t;
  }
  const double u11 = u[node(i + 1, j + 1)];
  return u10 * (1.0 - t) + u11 * (s + t - 1.0) + u01 * (1.0 - s);
}

}  // namespace rbhom
