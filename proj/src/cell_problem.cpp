#include "rbhom/cell_problem.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <vector>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

class Fnv1a {
 public:
  void add(const void* data, std::size_t bytes) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void add(const Vector& v) noexcept { add(v.data(), sizeof(double) * static_cast<std::size_t>(v.size())); }
  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

Eigen::Index find_entry(const SparseSpd& pattern, int row, int col) {
  const auto* outer = pattern.outerIndexPtr();
  const auto* inner = pattern.innerIndexPtr();
  const auto* begin = inner + outer[col];
  const auto* end = inner + outer[col + 1];
  const auto* it = std::lower_bound(begin, end, row);
  return static_cast<Eigen::Index>(it - inner);
}

}  // namespace

AffineSystem::AffineSystem(PeriodicMesh mesh) : mesh_(std::move(mesh)) {
  const auto n = dimension();
  std::vector<Eigen::Triplet<double>> pairs;
  pairs.reserve(mesh_.element_count() * 9);
  for (const auto& t : mesh_.elements()) {
    for (int a : t.nodes) {
      for (int b : t.nodes) pairs.emplace_back(a, b, 0.0);
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(pairs.begin(), pairs.end());
  pattern_.makeCompressed();

  const Eigen::Index nnz = pattern_.nonZeros();
  for (auto& v : stiffness_values_) v = Vector::Zero(nnz);
  for (auto& g : loads_) g = Vector::Zero(n);

  const double area = mesh_.element_area();
  for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
    const int block = mesh_.block_of_element(e);
    const auto grads = mesh_.local_gradients(e);
    const auto& nodes = mesh_.elements()[e].nodes;
    for (int d = 0; d < kDirections; ++d) {
      Vector& values = stiffness_values_[affine_term(block, d)];
      Vector& load = loads_[affine_term(block, d)];
      for (int a = 0; a < 3; ++a) {
        load[nodes[a]] += area * grads[a][d];
        for (int b = 0; b < 3; ++b) {
          values[find_entry(pattern_, nodes[a], nodes[b])] += area * grads[a][d] * grads[b][d];
        }
      }
    }
  }

  std::array<double, kAffineTerms> ones;
  ones.fill(1.0);
  laplacian_ = combine_stiffness(ones);
  reference_solver_ = std::make_shared<const QuotientSolver>(laplacian_, constraint());

  Fnv1a hash;
  const int side = mesh_.n_per_side();
  hash.add(&side, sizeof(side));
  for (const auto& v : stiffness_values_) hash.add(v);
  for (const auto& g : loads_) hash.add(g);
  fingerprint_ = hash.value();
}

SparseSpd AffineSystem::combine_stiffness(const std::array<double, kAffineTerms>& weights) const {
  SparseSpd k = pattern_;
  Eigen::Map<Vector> values(k.valuePtr(), k.nonZeros());
  values.setZero();
  for (int q = 0; q < kAffineTerms; ++q) {
    if (weights[q] != 0.0) values += weights[q] * stiffness_values_[q];
  }
  return k;
}

Vector AffineSystem::apply_block(int term, const Vector& v) const {
  const Eigen::Map<const SparseSpd> m(pattern_.rows(), pattern_.cols(), pattern_.nonZeros(),
                                      pattern_.outerIndexPtr(), pattern_.innerIndexPtr(),
                                      stiffness_values_[term].data());
  return m * v;
}

SparseSpd AffineSystem::block_stiffness(int block, Direction dir) const {
  if (block < 0 || block >= kBlockCount) throw ValidationError("block index out of range");
  std::array<double, kAffineTerms> w{};
  w[affine_term(block, static_cast<int>(dir))] = 1.0;
  return combine_stiffness(w);
}

std::array<double, kAffineTerms> stiffness_weights(const AffineCoeffs& coeffs) {
  std::array<double, kAffineTerms> w{};
  for (int k = 0; k < kBlockCount; ++k) {
    for (int d = 0; d < kDirections; ++d) w[affine_term(k, d)] = coeffs.stiffness[k][d];
  }
  return w;
}

AssembledCell assemble_at(const AffineSystem& system, const AffineCoeffs& coeffs) {
  AssembledCell cell;
  cell.stiffness = system.combine_stiffness(stiffness_weights(coeffs));
  for (int i = 0; i < kDirections; ++i) {
    cell.load[i] = Vector::Zero(system.dimension());
    for (int k = 0; k < kBlockCount; ++k) {
      cell.load[i] -= coeffs.load[k][i] * system.block_load(k, static_cast<Direction>(i));
    }
  }
  return cell;
}

AssembledCell assemble_at(const AffineSystem& system, const CellParam& param) {
  return assemble_at(system, affine_coeffs(param));
}

namespace {
std::atomic<std::uint64_t> g_truth_solves{0};
}

std::uint64_t truth_solve_count() noexcept { return g_truth_solves.load(); }

CellSolution solve_cell(const AffineSystem& system, const AffineCoeffs& coeffs, double rel_tol) {
  g_truth_solves.fetch_add(1, std::memory_order_relaxed);
  AssembledCell cell = assemble_at(system, coeffs);
  CellSolution sol;
  sol.coeffs = coeffs;
  const QuotientSolver solver(cell.stiffness, system.constraint());
  for (int i = 0; i < kDirections; ++i) {
    sol.w[i] = solver.solve(cell.load[i], rel_tol);
    const double fn = cell.load[i].norm();
    if (fn > 0.0) {
      sol.residual = std::max(sol.residual, (cell.stiffness * sol.w[i] - cell.load[i]).norm() / fn);
    }
    sol.load[i] = std::move(cell.load[i]);
  }
  return sol;
}

CellSolution solve_cell(const AffineSystem& system, const CellParam& param, double rel_tol) {
  return solve_cell(system, affine_coeffs(param), rel_tol);
}

HomogTensor homogenized_tensor(const CellSolution& sol) {
  HomogTensor t;
  for (int i = 0; i < kDirections; ++i) {
    for (int j = 0; j < kDirections; ++j) t.s(i, j) = -sol.load[j].dot(sol.w[i]);
  }
  t.a_star = sol.coeffs.mean * Eigen::Matrix2d::Identity() + t.s;
  return t;
}

VoigtReuss voigt_reuss(const CellParam& param) {
  const double q = param.inclusion_area();
  const double inside = 1.0 + param.theta;
  return {1.0 / (q / inside + (1.0 - q)), 1.0 - q + q * inside};
}

}  // namespace rbhom
