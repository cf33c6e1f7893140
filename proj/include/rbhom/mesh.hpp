#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace rbhom {

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Blocks of the 3x3 reference partition are numbered 3*row + col, where
/// col indexes [0,.25), [.25,.75), [.75,1) along y1 and row does the same
/// along y2. The inclusion block is therefore 4.
inline constexpr int kBlockCount = 9;
inline constexpr int kCenterBlock = 4;
inline constexpr int block_index(int col, int row) { return 3 * row + col; }
inline constexpr int block_col(int block) { return block % 3; }
inline constexpr int block_row(int block) { return block / 3; }

/// Uniform triangulation of the unit 2-torus. Each grid square is cut along
/// its anti-diagonal (the y2 = -y1 direction), giving a lower and an upper
/// isosceles right triangle.
class PeriodicMesh {
 public:
  struct Triangle {
    std::array<int, 3> nodes;
    bool upper;  // false: (i,j),(i+1,j),(i,j+1); true: (i+1,j),(i+1,j+1),(i,j+1)
    int cell_i;
    int cell_j;
  };

  /// Throws ValidationError unless n_per_side >= 4 and divisible by 4.
  explicit PeriodicMesh(int n_per_side);

  int n_per_side() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  std::size_t element_count() const noexcept { return elements_.size(); }

  int node(int i, int j) const noexcept;  // indices taken modulo n
  Point2 node_coords(int node) const noexcept;
  const std::vector<Triangle>& elements() const noexcept { return elements_; }
  int block_of_element(std::size_t e) const noexcept { return block_of_element_[e]; }
  double element_area() const noexcept { return 0.5 / (static_cast<double>(n_) * n_); }

  /// Gradients of the three local hat functions; constant on the element.
  std::array<std::array<double, 2>, 3> local_gradients(std::size_t e) const noexcept;

  /// Barycenter in unwrapped coordinates (may reach 1 before wrapping).
  Point2 barycenter(std::size_t e) const noexcept;

  /// Value at y in [0,1)^2 of the P1 function with nodal values `u`.
  double interpolate(const Eigen::VectorXd& u, Point2 y) const;

 private:
  int n_;
  std::vector<Triangle> elements_;
  std::vector<int> block_of_element_;
};

/// Block containing a point of the reference cell (coordinates in [0,1)).
int block_of_point(Point2 y) noexcept;

}  // namespace rbhom
