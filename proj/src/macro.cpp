#include "rbhom/macro.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "rbhom/errors.hpp"
#include "rbhom/sweep.hpp"

namespace rbhom {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string point_text(Point2 x) {
  return "(" + std::to_string(x.x1) + ", " + std::to_string(x.x2) + ")";
}

}  // namespace

CellParam eval_param_field(const ParamField& field, Point2 x) {
  constexpr double slack = 1e-12;
  if (!(x.x1 >= -slack && x.x1 <= 1.0 + slack && x.x2 >= -slack && x.x2 <= 1.0 + slack)) {
    throw ValidationError("parameter field evaluated outside the unit square at " + point_text(x));
  }
  switch (field.kind) {
    case FieldKind::constant:
      return field.constant;
    case FieldKind::user:
      if (!field.user) throw ValidationError("user parameter field has no function");
      return field.user(x);
    case FieldKind::analytic:
      break;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const double d = field.box.delta;
  CellParam p;
  p.b1 = 0.25 + d * std::sin(two_pi * x.x1);
  p.b2 = 0.25 + d * std::sin(two_pi * x.x2);
  p.c1 = 0.75 + d * std::cos(two_pi * x.x2);
  p.c2 = 0.75 + d * std::cos(two_pi * x.x1);
  p.theta = -field.box.theta0 * 0.5 * (x.x1 + x.x2);
  return p;
}

void validate_field(const ParamField& field, int grid) {
  if (grid < 1) throw ValidationError("field validation grid must be positive");
  field.box.validate();
  for (int b = 0; b <= grid; ++b) {
    for (int a = 0; a <= grid; ++a) {
      const Point2 x{static_cast<double>(a) / grid, static_cast<double>(b) / grid};
      const CellParam p = eval_param_field(field, x);
      validate(p);
      if (!field.box.contains(p)) {
        throw ValidationError("parameter field leaves the parameter box at " + point_text(x));
      }
    }
  }
}

// ---------------------------------------------------------------------------

MacroMesh::MacroMesh(int n_per_side) : n_(n_per_side) {
  if (n_per_side < 1) throw ValidationError("macro mesh needs at least one cell per side");
  elements_.reserve(static_cast<std::size_t>(2) * n_ * n_);
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      elements_.push_back({{node(i, j), node(i + 1, j), node(i, j + 1)}, false, i, j});
      elements_.push_back({{node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)}, true, i, j});
    }
  }
  for (int k = 0; k < n_; ++k) {
    edges_.push_back({{node(k, 0), node(k + 1, 0)}, Tag::neumann});
    edges_.push_back({{node(0, k), node(0, k + 1)}, Tag::neumann});
    edges_.push_back({{node(k, n_), node(k + 1, n_)}, Tag::dirichlet});
    edges_.push_back({{node(n_, k), node(n_, k + 1)}, Tag::dirichlet});
  }
}

MacroMesh MacroMesh::with_size(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("macro mesh size must be positive");
  return MacroMesh(std::max(1, static_cast<int>(std::lround(1.0 / h))));
}

Point2 MacroMesh::node_coords(int node) const noexcept {
  const int i = node % (n_ + 1);
  const int j = node / (n_ + 1);
  return {static_cast<double>(i) / n_, static_cast<double>(j) / n_};
}

bool MacroMesh::is_dirichlet(int node) const noexcept {
  return node % (n_ + 1) == n_ || node / (n_ + 1) == n_;
}

std::array<std::array<double, 2>, 3> MacroMesh::local_gradients(std::size_t e) const noexcept {
  const double g = n_;
  if (!elements_[e].upper) return {{{-g, -g}, {g, 0.0}, {0.0, g}}};
  return {{{0.0, -g}, {g, g}, {-g, 0.0}}};
}

Point2 MacroMesh::barycenter(std::size_t e) const noexcept {
  const Triangle& t = elements_[e];
  const double off = t.upper ? 2.0 / 3.0 : 1.0 / 3.0;
  return {(t.cell_i + off) / n_, (t.cell_j + off) / n_};
}

std::size_t MacroMesh::locate(Point2 x) const noexcept {
  const double s = x.x1 * n_;
  const double t = x.x2 * n_;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(t)), 0, n_ - 1);
  const bool upper = (s - i) + (t - j) > 1.0;
  return static_cast<std::size_t>(2 * (j * n_ + i) + (upper ? 1 : 0));
}

double MacroMesh::interpolate(const Vector& u, Point2 x) const {
  if (static_cast<std::size_t>(u.size()) != node_count()) {
    throw ValidationError("nodal vector does not match the macro mesh");
  }
  const std::size_t e = locate(x);
  const Triangle& tri = elements_[e];
  const double s = x.x1 * n_ - tri.cell_i;
  const double t = x.x2 * n_ - tri.cell_j;
  const auto& v = tri.nodes;
  if (!tri.upper) return u[v[0]] * (1.0 - s - t) + u[v[1]] * s + u[v[2]] * t;
  return u[v[0]] * (1.0 - t) + u[v[1]] * (s + t - 1.0) + u[v[2]] * (1.0 - s);
}

Eigen::Vector2d MacroMesh::gradient(const Vector& u, std::size_t e) const {
  const auto grads = local_gradients(e);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int a = 0; a < 3; ++a) {
    const double ua = u[elements_[e].nodes[a]];
    g[0] += ua * grads[a][0];
    g[1] += ua * grads[a][1];
  }
  return g;
}

// ---------------------------------------------------------------------------

HomogTensor TruthProvider::tensor(const CellParam& param) const {
  return homogenized_tensor(solve_cell(system_, param));
}

std::array<Vector, kDirections> TruthProvider::cell_functions(const CellParam& param) const {
  return solve_cell(system_, param).w;
}

HomogTensor RbProvider::tensor(const CellParam& param) const {
  const OnlineResult r = online_solve(basis_, param, n_used_, true);
  return {r.a_star_n, r.s_n, r.delta_s};
}

std::array<Vector, kDirections> RbProvider::cell_functions(const CellParam& param) const {
  std::array<Vector, kDirections> out;
  if (basis_.empty()) {
    for (auto& w : out) w = Vector::Zero(static_cast<Eigen::Index>(mesh_.node_count()));
    return out;
  }
  const OnlineResult r = online_solve(basis_, param, n_used_, false);
  for (int i = 0; i < kDirections; ++i) out[i] = basis_.reconstruct(r.w[i]);
  return out;
}

// ---------------------------------------------------------------------------

Vector neumann_load(const MacroMesh& mesh) {
  Vector f = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
  const double half = 0.5 * mesh.h();
  for (const auto& edge : mesh.boundary_edges()) {
    if (edge.tag != MacroMesh::Tag::neumann) continue;
    f[edge.nodes[0]] += half;
    f[edge.nodes[1]] += half;
  }
  return f;
}

MacroSystem assemble_from_tensors(const MacroMesh& mesh, const std::vector<Eigen::Matrix2d>& a_star) {
  if (a_star.size() != mesh.element_count()) {
    throw ValidationError("one tensor per macro element is required");
  }
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.element_count() * 9 + mesh.node_count());
  const double area = mesh.element_area();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto grads = mesh.local_gradients(e);
    const auto& nodes = mesh.elements()[e].nodes;
    for (int a = 0; a < 3; ++a) {
      if (mesh.is_dirichlet(nodes[a])) continue;
      const Eigen::Vector2d ga(grads[a][0], grads[a][1]);
      for (int b = 0; b < 3; ++b) {
        if (mesh.is_dirichlet(nodes[b])) continue;
        const Eigen::Vector2d gb(grads[b][0], grads[b][1]);
        triplets.emplace_back(nodes[a], nodes[b], area * gb.dot(a_star[e] * ga));
      }
    }
  }
  for (Eigen::Index l = 0; l < n; ++l) {
    if (mesh.is_dirichlet(static_cast<int>(l))) triplets.emplace_back(l, l, 1.0);
  }
  MacroSystem sys;
  sys.stiffness.resize(n, n);
  sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs = neumann_load(mesh);
  for (Eigen::Index l = 0; l < n; ++l) {
    if (mesh.is_dirichlet(static_cast<int>(l))) sys.rhs[l] = 0.0;
  }
  sys.a_star = a_star;
  sys.delta_s.assign(a_star.size(), Eigen::Matrix2d::Zero());
  sys.min_physical.assign(a_star.size(), 1.0);
  return sys;
}

MacroSystem assemble_homogenized(const MacroMesh& mesh, const ParamField& field,
                                 const CoefficientProvider& provider, Execution execution) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t ne = mesh.element_count();
  std::vector<CellParam> params(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    params[e] = eval_param_field(field, mesh.barycenter(e));
    try {
      validate(params[e]);
    } catch (const ValidationError& err) {
      throw ValidationError("macro element " + std::to_string(e) + ": " + err.what());
    }
    if (!field.box.contains(params[e])) {
      throw ValidationError("macro element " + std::to_string(e) +
                            ": cell parameter outside the parameter box");
    }
  }
  std::vector<HomogTensor> tensors(ne);
  for_each_index(ne, execution, [&](std::size_t e) {
    try {
      tensors[e] = provider.tensor(params[e]);
    } catch (const SolveError& err) {
      throw SolveError("macro element " + std::to_string(e) + ": " + err.detail(), err.residual());
    }
  });
  std::vector<Eigen::Matrix2d> a_star(ne);
  for (std::size_t e = 0; e < ne; ++e) a_star[e] = tensors[e].a_star;
  MacroSystem sys = assemble_from_tensors(mesh, a_star);
  sys.params = std::move(params);
  for (std::size_t e = 0; e < ne; ++e) {
    if (tensors[e].bounds) sys.delta_s[e] = *tensors[e].bounds;
    sys.min_physical[e] = 1.0 + sys.params[e].theta;
  }
  sys.source = provider.name();
  sys.assembly_seconds = seconds_since(start);
  return sys;
}

Vector solve_macro(const MacroSystem& system, double rel_tol) {
  Eigen::SimplicialLLT<SparseSpd> llt(system.stiffness);
  if (llt.info() != Eigen::Success) {
    throw SolveError("macro stiffness is not positive definite", 1.0);
  }
  const double rhs_norm = system.rhs.norm();
  if (rhs_norm == 0.0) return Vector::Zero(system.rhs.size());
  Vector u = llt.solve(system.rhs);
  double res = (system.rhs - system.stiffness * u).norm() / rhs_norm;
  for (int pass = 0; pass < 3 && res > rel_tol; ++pass) {
    u += llt.solve(system.rhs - system.stiffness * u);
    res = (system.rhs - system.stiffness * u).norm() / rhs_norm;
  }
  if (!(res <= rel_tol)) throw SolveError("macro solve missed its residual target", res);
  return u;
}

HomogenizedRun run_homogenized(const MacroMesh& mesh, const ParamField& field,
                               const CoefficientProvider& provider, Execution execution) {
  HomogenizedRun run;
  run.system = assemble_homogenized(mesh, field, provider, execution);
  const auto start = std::chrono::steady_clock::now();
  run.u_star = solve_macro(run.system);
  run.solve_seconds = seconds_since(start);
  for (const auto& d : run.system.delta_s) run.max_delta_s = std::max(run.max_delta_s, d.cwiseAbs().maxCoeff());
  return run;
}

MacroNorms macro_norms(const MacroMesh& mesh, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != mesh.node_count()) {
    throw ValidationError("nodal vector does not match the macro mesh");
  }
  const double area = mesh.element_area();
  double l2 = 0.0;
  double semi = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& v = mesh.elements()[e].nodes;
    const double sum = u[v[0]] + u[v[1]] + u[v[2]];
    const double sq = u[v[0]] * u[v[0]] + u[v[1]] * u[v[1]] + u[v[2]] * u[v[2]];
    l2 += area / 12.0 * (sq + sum * sum);
    semi += area * mesh.gradient(u, e).squaredNorm();
  }
  return {std::sqrt(l2), std::sqrt(semi), std::sqrt(l2 + semi)};
}

MacroComparison compare_macro(const MacroMesh& mesh, const Vector& u_truth, const Vector& u_rb) {
  if (u_truth.size() != u_rb.size()) throw ValidationError("macro solutions differ in size");
  const MacroNorms diff = macro_norms(mesh, u_truth - u_rb);
  MacroComparison c;
  c.l2_err = diff.l2;
  c.h1_err = diff.h1;
  return c;
}

MacroComparison compare_macro(const MacroMesh& mesh, const Vector& u_truth, const HomogenizedRun& rb_run) {
  MacroComparison c = compare_macro(mesh, u_truth, rb_run.u_star);
  const MacroSystem& sys = rb_run.system;
  c.alpha = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (std::size_t e = 0; e < sys.a_star.size(); ++e) {
    c.tensor_error = std::max(c.tensor_error, sys.delta_s[e].norm());
    c.alpha = std::min(c.alpha, sys.min_physical[e]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (sys.a_star[e] + sys.a_star[e].transpose()),
                                                       Eigen::EigenvaluesOnly);
    max_norm = std::max(max_norm, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  c.gamma_star = max_norm + c.tensor_error;
  const double grad_sq = std::pow(macro_norms(mesh, rb_run.u_star).h1_semi, 2);
  const double poincare = std::numbers::sqrt2 / std::numbers::pi;
  const double energy = c.tensor_error / c.alpha * (c.tensor_error * c.gamma_star / c.alpha + 1.0) * grad_sq;
  c.indicator = std::sqrt((1.0 + poincare * poincare) * energy);
  return c;
}

CorrectorField reconstruct_corrector(const MacroMesh& mesh, const Vector& u_star,
                                     const ParamField& field, const CoefficientProvider& provider,
                                     double epsilon, int resolution, Execution execution) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ValidationError("epsilon must lie in (0, 1)");
  if (resolution < 1) throw ValidationError("corrector grid resolution must be positive");
  if (static_cast<std::size_t>(u_star.size()) != mesh.node_count()) {
    throw ValidationError("nodal vector does not match the macro mesh");
  }
  CorrectorField out;
  out.epsilon = epsilon;
  out.resolution = resolution;
  out.under_resolved = epsilon * resolution < 4.0;

  const std::size_t count = static_cast<std::size_t>(resolution) * resolution;
  std::vector<Point2> points(count);
  std::vector<std::size_t> owner(count);
  std::vector<char> used(mesh.element_count(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    const auto a = static_cast<double>(k % resolution);
    const auto b = static_cast<double>(k / resolution);
    points[k] = {(a + 0.5) / resolution, (b + 0.5) / resolution};
    owner[k] = mesh.locate(points[k]);
    used[owner[k]] = 1;
  }
  std::vector<std::size_t> active;
  std::vector<std::size_t> slot(mesh.element_count(), 0);
  for (std::size_t e = 0; e < used.size(); ++e) {
    if (used[e]) {
      slot[e] = active.size();
      active.push_back(e);
    }
  }
  std::vector<CellParam> params(active.size());
  std::vector<BlockMap> maps(active.size());
  std::vector<std::array<Vector, kDirections>> cell_w(active.size());
  for_each_index(active.size(), execution, [&](std::size_t k) {
    params[k] = eval_param_field(field, mesh.barycenter(active[k]));
    validate(params[k]);
    maps[k] = block_map(params[k]);
    cell_w[k] = provider.cell_functions(params[k]);
  });

  const PeriodicMesh& cell = provider.cell_mesh();
  out.samples.resize(count);
  for_each_index(count, execution, [&](std::size_t k) {
    const Point2 x = points[k];
    const std::size_t e = owner[k];
    const std::size_t s = slot[e];
    Point2 y{x.x1 / epsilon, x.x2 / epsilon};
    y.x1 -= std::floor(y.x1);
    y.x2 -= std::floor(y.x2);
    Point2 ref = maps[s].inverse(y);
    ref.x1 -= std::floor(ref.x1);
    ref.x2 -= std::floor(ref.x2);
    CorrectorSample& sample = out.samples[k];
    sample.x = x;
    sample.u_star = mesh.interpolate(u_star, x);
    sample.grad = mesh.gradient(u_star, e);
    double corr = 0.0;
    for (int i = 0; i < kDirections; ++i) corr += cell.interpolate(cell_w[s][i], ref) * sample.grad[i];
    sample.u_corrected = sample.u_star + epsilon * corr;
  });
  return out;
}

}  // namespace rbhom
