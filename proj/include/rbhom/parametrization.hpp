#pragma once

#include <array>

#include <Eigen/Core>

#include "rbhom/mesh.hpp"

namespace rbhom {

/// Rectangular inclusion [b1,c1] x [b2,c2] in the unit cell with coefficient
/// 1 + theta inside and 1 outside.
struct CellParam {
  double b1 = 0.25;
  double c1 = 0.75;
  double b2 = 0.25;
  double c2 = 0.75;
  double theta = 0.0;

  double b(int d) const noexcept { return d == 0 ? b1 : b2; }
  double c(int d) const noexcept { return d == 0 ? c1 : c2; }
  double inclusion_area() const noexcept { return (c1 - b1) * (c2 - b2); }

  friend bool operator==(const CellParam&, const CellParam&) = default;
};

/// Throws ValidationError unless 0 < b_i < c_i < 1 and -1 < theta <= 0.
void validate(const CellParam& param);

/// The sampling box [.25-delta,.25+delta]^2 x [.75-delta,.75+delta]^2 x [-theta0, 0].
struct ParamBox {
  double delta = 0.1;
  double theta0 = 0.99;

  /// Throws ValidationError unless 0 < delta < .25 and 0 <= theta0 < 1.
  void validate() const;
  bool contains(const CellParam& param, double slack = 1e-12) const noexcept;
  CellParam lower() const noexcept { return {0.25 - delta, 0.75 - delta, 0.25 - delta, 0.75 - delta, -theta0}; }
  CellParam upper() const noexcept { return {0.25 + delta, 0.75 + delta, 0.25 + delta, 0.75 + delta, 0.0}; }
};

/// Piecewise-affine map from the reference cell (lines at .25 and .75) onto
/// the physical cell (lines at b_i and c_i). On block k the map is
/// y -> offset_k + diag(scale_k) y.
struct BlockMap {
  std::array<std::array<double, 2>, kBlockCount> scale{};
  std::array<std::array<double, 2>, kBlockCount> offset{};

  double det(int block) const noexcept { return scale[block][0] * scale[block][1]; }
  Point2 forward(Point2 reference) const noexcept;
  Point2 inverse(Point2 physical) const noexcept;
};

BlockMap block_map(const CellParam& param);

/// Per-(block, direction) scalar weights of the mapped forms:
///   a(u,v) = sum_{k,d} stiffness[k][d] int_{block k} d_d u d_d v
///   f_i(v) = -sum_k load[k][i] int_{block k} d_i v
struct AffineCoeffs {
  std::array<std::array<double, 2>, kBlockCount> stiffness{};
  std::array<std::array<double, 2>, kBlockCount> load{};
  std::array<double, kBlockCount> volume{};
  /// Exact cell average of the physical coefficient.
  double mean = 1.0;
  /// Lower bound of the physical coefficient (1 + theta).
  double min_physical = 1.0;

  double alpha() const noexcept;
  double gamma() const noexcept;
};

AffineCoeffs affine_coeffs(const CellParam& param);

/// Horizontal laminate: coefficient 1 + theta on the strip y2 in [.25,.75],
/// 1 elsewhere, on the undeformed reference cell.
AffineCoeffs laminate_coeffs(double theta);

struct CoercivityBounds {
  double alpha;
  double gamma;
};

CoercivityBounds coercivity_bounds(const CellParam& param);

/// (1 + theta |Q|) I.
Eigen::Matrix2d mean_coefficient(const CellParam& param);

}  // namespace rbhom
