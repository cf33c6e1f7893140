#include "rbhom/parametrization.hpp"

#include <algorithm>
#include <sstream>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

constexpr std::array<double, 4> kReferenceLines{0.0, 0.25, 0.75, 1.0};

std::string describe(const CellParam& p) {
  std::ostringstream os;
  os << "(b1=" << p.b1 << ", c1=" << p.c1 << ", b2=" << p.b2 << ", c2=" << p.c2
     << ", theta=" << p.theta << ")";
  return os.str();
}

int band_of(double y, double lo, double hi) noexcept {
  if (y < lo) return 0;
  if (y < hi) return 1;
  return 2;
}

}  // namespace

void validate(const CellParam& p) {
  for (int d = 0; d < 2; ++d) {
    if (!(p.b(d) > 0.0 && p.b(d) < p.c(d) && p.c(d) < 1.0)) {
      throw ValidationError("degenerate inclusion geometry " + describe(p));
    }
  }
  if (!(p.theta > -1.0 && p.theta <= 0.0)) {
    throw ValidationError("contrast theta must lie in (-1, 0] " + describe(p));
  }
}

void ParamBox::validate() const {
  if (!(delta > 0.0 && delta < 0.25)) throw ValidationError("delta must lie in (0, .25)");
  if (!(theta0 >= 0.0 && theta0 < 1.0)) throw ValidationError("theta0 must lie in [0, 1)");
}

bool ParamBox::contains(const CellParam& p, double slack) const noexcept {
  const CellParam lo = lower();
  const CellParam hi = upper();
  auto in = [slack](double v, double a, double b) { return v >= a - slack && v <= b + slack; };
  return in(p.b1, lo.b1, hi.b1) && in(p.c1, lo.c1, hi.c1) && in(p.b2, lo.b2, hi.b2) &&
         in(p.c2, lo.c2, hi.c2) && in(p.theta, lo.theta, hi.theta);
}

Point2 BlockMap::forward(Point2 y) const noexcept {
  const int k = block_of_point(y);
  return {offset[k][0] + scale[k][0] * y.x1, offset[k][1] + scale[k][1] * y.x2};
}

Point2 BlockMap::inverse(Point2 x) const noexcept {
  // Physical band edges are the images of the reference lines.
  std::array<double, 2> lo{}, hi{};
  for (int d = 0; d < 2; ++d) {
    const int left = block_index(0, 0);
    const int center = kCenterBlock;
    lo[d] = offset[left][d] + scale[left][d] * 0.25;
    hi[d] = offset[center][d] + scale[center][d] * 0.75;
  }
  const int col = band_of(x.x1, lo[0], hi[0]);
  const int row = band_of(x.x2, lo[1], hi[1]);
  const int k = block_index(col, row);
  return {(x.x1 - offset[k][0]) / scale[k][0], (x.x2 - offset[k][1]) / scale[k][1]};
}

BlockMap block_map(const CellParam& param) {
  validate(param);
  BlockMap map;
  std::array<std::array<double, 3>, 2> band_scale{}, band_offset{};
  for (int d = 0; d < 2; ++d) {
    const std::array<double, 4> physical{0.0, param.b(d), param.c(d), 1.0};
    for (int band = 0; band < 3; ++band) {
      const double s = (physical[band + 1] - physical[band]) /
                       (kReferenceLines[band + 1] - kReferenceLines[band]);
      band_scale[d][band] = s;
      band_offset[d][band] = physical[band] - s * kReferenceLines[band];
    }
  }
  for (int k = 0; k < kBlockCount; ++k) {
    map.scale[k] = {band_scale[0][block_col(k)], band_scale[1][block_row(k)]};
    map.offset[k] = {band_offset[0][block_col(k)], band_offset[1][block_row(k)]};
  }
  return map;
}

double AffineCoeffs::alpha() const noexcept {
  double a = stiffness[0][0];
  for (const auto& s : stiffness) a = std::min({a, s[0], s[1]});
  return a;
}

double AffineCoeffs::gamma() const noexcept {
  double g = stiffness[0][0];
  for (const auto& s : stiffness) g = std::max({g, s[0], s[1]});
  return g;
}

AffineCoeffs affine_coeffs(const CellParam& param) {
  const BlockMap map = block_map(param);
  AffineCoeffs coeffs;
  for (int k = 0; k < kBlockCount; ++k) {
    const double physical = k == kCenterBlock ? 1.0 + param.theta : 1.0;
    const double det = map.det(k);
    coeffs.volume[k] = det;
    for (int d = 0; d < 2; ++d) {
      const double j = map.scale[k][d];
      coeffs.stiffness[k][d] = det / (j * j) * physical;
      coeffs.load[k][d] = det / j * physical;
    }
  }
  coeffs.mean = 1.0 + param.theta * param.inclusion_area();
  coeffs.min_physical = 1.0 + param.theta;
  return coeffs;
}

AffineCoeffs laminate_coeffs(double theta) {
  if (!(theta > -1.0)) throw ValidationError("laminate contrast must exceed -1");
  AffineCoeffs coeffs;
  for (int k = 0; k < kBlockCount; ++k) {
    const double physical = block_row(k) == 1 ? 1.0 + theta : 1.0;
    coeffs.volume[k] = 1.0;
    coeffs.stiffness[k] = {physical, physical};
    coeffs.load[k] = {physical, physical};
  }
  coeffs.mean = 1.0 + 0.5 * theta;
  coeffs.min_physical = std::min(1.0, 1.0 + theta);
  return coeffs;
}

CoercivityBounds coercivity_bounds(const CellParam& param) {
  const AffineCoeffs c = affine_coeffs(param);
  return {c.alpha(), c.gamma()};
}

Eigen::Matrix2d mean_coefficient(const CellParam& param) {
  validate(param);
  return (1.0 + param.theta * param.inclusion_area()) * Eigen::Matrix2d::Identity();
}

}  // namespace rbhom
