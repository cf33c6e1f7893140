#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rbhom/cell_problem.hpp"
#include "rbhom/fe.hpp"
#include "rbhom/parametrization.hpp"
#include "rbhom/reduced_basis.hpp"

namespace rbhom {

enum class FieldKind { analytic, constant, user };

/// Cell parameter as a function of the macroscopic position.
///
/// The analytic field is
///   b_i(x) = .25 + delta sin(2 pi x_i),  c_i(x) = .75 + delta cos(2 pi x_{3-i}),
///   theta(x) = -theta0 (x1 + x2) / 2.
struct ParamField {
  FieldKind kind = FieldKind::analytic;
  ParamBox box;
  CellParam constant;
  std::function<CellParam(Point2)> user;

  static ParamField analytic(ParamBox box) { return {FieldKind::analytic, box, {}, {}}; }
  static ParamField uniform(ParamBox box, CellParam value) { return {FieldKind::constant, box, value, {}}; }
};

/// Throws ValidationError for x outside [0,1]^2.
CellParam eval_param_field(const ParamField& field, Point2 x);

/// Evaluates the field on a grid x grid lattice and throws ValidationError
/// at the first parameter outside the box or violating CellParam invariants.
void validate_field(const ParamField& field, int grid = 100);

/// Uniform triangulation of [0,1]^2, same cut pattern as the cell mesh.
/// Dirichlet on {x1 = 1} U {x2 = 1}, Neumann on {x1 = 0} U {x2 = 0}.
class MacroMesh {
 public:
  enum class Tag { dirichlet, neumann };
  struct Edge {
    std::array<int, 2> nodes;
    Tag tag;
  };
  struct Triangle {
    std::array<int, 3> nodes;
    bool upper;
    int cell_i;
    int cell_j;
  };

  explicit MacroMesh(int n_per_side);
  /// Mesh with n = round(1 / h) cells per side.
  static MacroMesh with_size(double h);

  int n_per_side() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(n_ + 1) * (n_ + 1); }
  std::size_t element_count() const noexcept { return elements_.size(); }
  int node(int i, int j) const noexcept { return j * (n_ + 1) + i; }
  Point2 node_coords(int node) const noexcept;
  const std::vector<Triangle>& elements() const noexcept { return elements_; }
  const std::vector<Edge>& boundary_edges() const noexcept { return edges_; }
  bool is_dirichlet(int node) const noexcept;
  double element_area() const noexcept { return 0.5 / (static_cast<double>(n_) * n_); }
  std::array<std::array<double, 2>, 3> local_gradients(std::size_t e) const noexcept;
  Point2 barycenter(std::size_t e) const noexcept;
  /// Element containing x (ties resolved toward the lower-left).
  std::size_t locate(Point2 x) const noexcept;
  /// P1 interpolant of nodal values at x.
  double interpolate(const Vector& u, Point2 x) const;
  Eigen::Vector2d gradient(const Vector& u, std::size_t e) const;

 private:
  int n_;
  std::vector<Triangle> elements_;
  std::vector<Edge> edges_;
};

/// Source of homogenized tensors and cell functions at a cell parameter.
class CoefficientProvider {
 public:
  virtual ~CoefficientProvider() = default;
  virtual std::string name() const = 0;
  /// Tensor with output bounds when the source is certified.
  virtual HomogTensor tensor(const CellParam& param) const = 0;
  /// Cell functions as FE vectors on cell_mesh() (reference coordinates).
  virtual std::array<Vector, kDirections> cell_functions(const CellParam& param) const = 0;
  virtual const PeriodicMesh& cell_mesh() const = 0;
};

class TruthProvider final : public CoefficientProvider {
 public:
  explicit TruthProvider(const AffineSystem& system) : system_(system) {}
  std::string name() const override { return "truth"; }
  HomogTensor tensor(const CellParam& param) const override;
  std::array<Vector, kDirections> cell_functions(const CellParam& param) const override;
  const PeriodicMesh& cell_mesh() const override { return system_.mesh(); }

 private:
  const AffineSystem& system_;
};

class RbProvider final : public CoefficientProvider {
 public:
  RbProvider(const ReducedBasis& basis, const PeriodicMesh& mesh, std::size_t n_used = 0)
      : basis_(basis), mesh_(mesh), n_used_(n_used) {}
  std::string name() const override { return "rb"; }
  HomogTensor tensor(const CellParam& param) const override;
  std::array<Vector, kDirections> cell_functions(const CellParam& param) const override;
  const PeriodicMesh& cell_mesh() const override { return mesh_; }

 private:
  const ReducedBasis& basis_;
  const PeriodicMesh& mesh_;
  std::size_t n_used_;
};

struct MacroSystem {
  SparseSpd stiffness;  // Dirichlet rows and columns replaced by identity
  Vector rhs;           // zero at Dirichlet nodes
  std::vector<CellParam> params;
  std::vector<Eigen::Matrix2d> a_star;
  std::vector<Eigen::Matrix2d> delta_s;  // zero for an uncertified source
  std::vector<double> min_physical;      // 1 + theta per element
  std::string source;
  double assembly_seconds = 0.0;
};

/// Nodal vector of the Neumann data, int_{Gamma_N} phi_l, before elimination.
Vector neumann_load(const MacroMesh& mesh);

/// One tensor query per element at its barycenter.
MacroSystem assemble_homogenized(const MacroMesh& mesh, const ParamField& field,
                                 const CoefficientProvider& provider,
                                 Execution execution = Execution::parallel);

/// Same assembly from per-element tensors supplied by the caller.
MacroSystem assemble_from_tensors(const MacroMesh& mesh, const std::vector<Eigen::Matrix2d>& a_star);

/// Throws SolveError when the relative residual exceeds rel_tol.
Vector solve_macro(const MacroSystem& system, double rel_tol = 1e-12);

struct HomogenizedRun {
  MacroSystem system;
  Vector u_star;
  double solve_seconds = 0.0;
  double max_delta_s = 0.0;
};

HomogenizedRun run_homogenized(const MacroMesh& mesh, const ParamField& field,
                               const CoefficientProvider& provider,
                               Execution execution = Execution::parallel);

struct MacroNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;
};

/// L2, H1-seminorm and full H1 norms of a macro P1 function.
MacroNorms macro_norms(const MacroMesh& mesh, const Vector& u);

struct MacroComparison {
  double l2_err = 0.0;
  double h1_err = 0.0;
  double indicator = 0.0;    // bound for h1_err built from certified tensor errors
  double tensor_error = 0.0; // max over elements of ||delta_s||_F
  double alpha = 0.0;        // min over elements of 1 + theta
  double gamma_star = 0.0;   // max over elements of ||A*_N||_2 + tensor_error
};

/// Differences between two macro solutions on the same mesh.
MacroComparison compare_macro(const MacroMesh& mesh, const Vector& u_truth, const Vector& u_rb);

/// Adds the certified transport indicator
///   sqrt((1 + P^2) (1/alpha) (dA gamma*/alpha + 1) dA ||grad u_N||^2),
/// with P = sqrt(2)/pi the Poincare constant of the mixed problem on the unit square,
/// computed from the rb run only.
MacroComparison compare_macro(const MacroMesh& mesh, const Vector& u_truth, const HomogenizedRun& rb_run);

struct CorrectorSample {
  Point2 x;
  double u_corrected = 0.0;
  double u_star = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
};

struct CorrectorField {
  std::vector<CorrectorSample> samples;
  double epsilon = 0.0;
  int resolution = 0;
  bool under_resolved = false;  // fewer than 4 samples per period
};

/// u*(x) + eps sum_i w_i(x, x/eps mod 1) d_i u*(x) on a resolution x resolution
/// grid of cell-centered points. Cell functions are taken at the macro
/// element's barycenter parameter, matching the tensor used in assembly.
CorrectorField reconstruct_corrector(const MacroMesh& mesh, const Vector& u_star,
                                     const ParamField& field, const CoefficientProvider& provider,
                                     double epsilon, int resolution,
                                     Execution execution = Execution::parallel);

}  // namespace rbhom
