#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "rbhom/config.hpp"
#include "rbhom/errors.hpp"
#include "rbhom/macro.hpp"

using namespace rbhom;

namespace {

struct Fixture {
  AffineSystem system{PeriodicMesh(12)};
  ParamBox box{0.1, 0.99};
  ReducedBasis basis = greedy_build(system, sample_box(box, 50, 2024), {20, 0.0, Execution::parallel}, box).basis;
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

/// Dense P1 solve of -div(grad u) = 0 with the mixed boundary data,
/// assembled from node coordinates and with Dirichlet rows removed.
Vector laplace_mixed_oracle(const MacroMesh& mesh) {
  const int n = mesh.n_per_side();
  const int nodes = (n + 1) * (n + 1);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nodes, nodes);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nodes);
  auto xy = [&](int node) { return Eigen::Vector2d(double(node % (n + 1)) / n, double(node / (n + 1)) / n); };
  for (const auto& t : mesh.elements()) {
    Eigen::Matrix2d j;
    j.col(0) = xy(t.nodes[1]) - xy(t.nodes[0]);
    j.col(1) = xy(t.nodes[2]) - xy(t.nodes[0]);
    const double area = 0.5 * std::abs(j.determinant());
    const Eigen::Matrix2d jit = j.inverse().transpose();
    Eigen::Matrix<double, 2, 3> g;
    g.col(1) = jit.col(0);
    g.col(2) = jit.col(1);
    g.col(0) = -g.col(1) - g.col(2);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) k(t.nodes[a], t.nodes[b]) += area * g.col(a).dot(g.col(b));
    }
  }
  const double h = 1.0 / n;
  for (int s = 0; s < n; ++s) {
    // bottom edge x2 = 0 and left edge x1 = 0, flux 1
    f[s] += h / 2;
    f[s + 1] += h / 2;
    f[s * (n + 1)] += h / 2;
    f[(s + 1) * (n + 1)] += h / 2;
  }
  std::vector<int> free;
  for (int l = 0; l < nodes; ++l) {
    if (l % (n + 1) != n && l / (n + 1) != n) free.push_back(l);
  }
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kf(m, m);
  Eigen::VectorXd ff(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    ff[a] = f[free[a]];
    for (Eigen::Index b = 0; b < m; ++b) kf(a, b) = k(free[a], free[b]);
  }
  const Eigen::VectorXd uf = kf.ldlt().solve(ff);
  Vector u = Vector::Zero(nodes);
  for (Eigen::Index a = 0; a < m; ++a) u[free[a]] = uf[a];
  return u;
}

}  // namespace

TEST_SUITE("macro") {
  TEST_CASE("analytic field at the origin") {
    const ParamField field = ParamField::analytic({0.1, 0.99});
    const CellParam p = eval_param_field(field, {0.0, 0.0});
    CHECK(p.b1 == doctest::Approx(0.25));
    CHECK(p.c1 == doctest::Approx(0.85));
    CHECK(p.b2 == doctest::Approx(0.25));
    CHECK(p.c2 == doctest::Approx(0.85));
    CHECK(p.theta == 0.0);
    CHECK(field.box.contains(p));
    const CellParam q = eval_param_field(field, {1.0, 1.0});
    CHECK(q.theta == doctest::Approx(-0.99));
  }

  TEST_CASE("field validation") {
    CHECK_NOTHROW(validate_field(ParamField::analytic({0.1, 0.99}), 100));
    CHECK_NOTHROW(validate_field(ParamField::analytic({0.2, 0.99}), 100));
    const ParamField constant = ParamField::uniform({0.1, 0.5}, CellParam{0.3, 0.7, 0.2, 0.8, -0.4});
    CHECK(eval_param_field(constant, {0.1, 0.9}) == eval_param_field(constant, {0.7, 0.3}));
    CHECK_THROWS_AS(eval_param_field(constant, {1.5, 0.2}), ValidationError);
    ParamField escaping{FieldKind::user, {0.1, 0.5}, {}, [](Point2 x) {
                          return CellParam{0.25 + 0.3 * x.x1, 0.75, 0.25, 0.75, 0.0};
                        }};
    CHECK_THROWS_AS(validate_field(escaping, 10), ValidationError);
  }

  TEST_CASE("escaping user field fails at assembly with the element id") {
    ParamField escaping{FieldKind::user, {0.1, 0.5}, {}, [](Point2 x) {
                          return CellParam{0.25 + 0.3 * x.x1, 0.75, 0.25, 0.75, 0.0};
                        }};
    const TruthProvider truth(fx().system);
    try {
      assemble_homogenized(MacroMesh(4), escaping, truth);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("macro element") != std::string::npos);
    }
  }

  TEST_CASE("mesh boundary tags cover each boundary edge once") {
    const MacroMesh mesh(6);
    CHECK(mesh.boundary_edges().size() == 24);
    int dirichlet = 0;
    for (const auto& e : mesh.boundary_edges()) {
      const Point2 a = mesh.node_coords(e.nodes[0]);
      const Point2 b = mesh.node_coords(e.nodes[1]);
      const bool on_dirichlet = (a.x1 == 1.0 && b.x1 == 1.0) || (a.x2 == 1.0 && b.x2 == 1.0);
      const bool on_neumann = (a.x1 == 0.0 && b.x1 == 0.0) || (a.x2 == 0.0 && b.x2 == 0.0);
      CHECK(on_dirichlet != on_neumann);
      CHECK((e.tag == MacroMesh::Tag::dirichlet) == on_dirichlet);
      dirichlet += on_dirichlet ? 1 : 0;
    }
    CHECK(dirichlet == 12);
    CHECK(neumann_load(mesh).sum() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(MacroMesh::with_size(0.03).n_per_side() == 33);
    CHECK_THROWS_AS(MacroMesh(0), ValidationError);
  }

  TEST_CASE("identity tensor reproduces an independently assembled Laplace solve") {
    const MacroMesh mesh(8);
    const MacroSystem sys = assemble_from_tensors(mesh, std::vector<Eigen::Matrix2d>(mesh.element_count(), Eigen::Matrix2d::Identity()));
    const Vector u = solve_macro(sys);
    const Vector oracle = laplace_mixed_oracle(mesh);
    CHECK((u - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index l = 0; l < u.size(); ++l) {
      if (mesh.is_dirichlet(static_cast<int>(l))) CHECK(u[l] == 0.0);
      CHECK(u[l] >= -1e-14);
    }
    const MacroSystem doubled = assemble_from_tensors(mesh, std::vector<Eigen::Matrix2d>(mesh.element_count(), 2.0 * Eigen::Matrix2d::Identity()));
    CHECK((solve_macro(doubled) - 0.5 * u).cwiseAbs().maxCoeff() <= 1e-13);
  }

  TEST_CASE("zero contrast field gives the plain Laplacian for both providers") {
    const ParamField field = ParamField::analytic({0.1, 0.0});
    const MacroMesh mesh(8);
    const TruthProvider truth(fx().system);
    const RbProvider rb(fx().basis, fx().system.mesh());
    const HomogenizedRun a = run_homogenized(mesh, field, truth);
    const HomogenizedRun b = run_homogenized(mesh, field, rb);
    for (const auto& t : a.system.a_star) CHECK((t - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((a.u_star - laplace_mixed_oracle(mesh)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a.u_star - b.u_star).cwiseAbs().maxCoeff() <= 1e-10);
    const MacroComparison same = compare_macro(mesh, a.u_star, a.u_star);
    CHECK(same.l2_err == 0.0);
    CHECK(same.h1_err == 0.0);
  }

  TEST_CASE("elementwise tensors from the two providers agree within the output bounds") {
    const MacroMesh mesh(8);
    const ParamField field = ParamField::analytic(fx().box);
    const MacroSystem t = assemble_homogenized(mesh, field, TruthProvider(fx().system));
    const RbProvider rb(fx().basis, fx().system.mesh());
    const auto solves = truth_solve_count();
    const MacroSystem r = assemble_homogenized(mesh, field, rb);
    CHECK(truth_solve_count() == solves);
    CHECK(r.source == "rb");
    double max_bound = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(std::abs(t.a_star[e](i, j) - r.a_star[e](i, j)) <= r.delta_s[e](i, j) + 1e-10);
      }
      max_bound = std::max(max_bound, r.delta_s[e].maxCoeff());
    }
    CHECK(max_bound > 0.0);
  }

  TEST_CASE("indicator dominates the measured macro error and errors shrink with N") {
    const MacroMesh mesh(12);
    const ParamField field = ParamField::analytic(fx().box);
    const HomogenizedRun truth = run_homogenized(mesh, field, TruthProvider(fx().system));
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n : {4, 10, 20}) {
      const RbProvider rb(fx().basis, fx().system.mesh(), n);
      const HomogenizedRun run = run_homogenized(mesh, field, rb);
      const MacroComparison c = compare_macro(mesh, truth.u_star, run);
      CHECK(c.h1_err <= c.indicator);
      CHECK(c.l2_err <= c.h1_err);
      CHECK(c.h1_err <= previous * 1.05);
      previous = c.h1_err;
    }
  }

  TEST_CASE("serial and parallel macro assembly agree") {
    const MacroMesh mesh(6);
    const ParamField field = ParamField::analytic(fx().box);
    const RbProvider rb(fx().basis, fx().system.mesh());
    const MacroSystem a = assemble_homogenized(mesh, field, rb, Execution::serial);
    const MacroSystem b = assemble_homogenized(mesh, field, rb, Execution::parallel);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) CHECK(a.a_star[e] == b.a_star[e]);
  }

  TEST_CASE("corrector vanishes for a homogeneous medium") {
    const MacroMesh mesh(8);
    const ParamField field = ParamField::analytic({0.1, 0.0});
    const TruthProvider truth(fx().system);
    const HomogenizedRun run = run_homogenized(mesh, field, truth);
    const CorrectorField c = reconstruct_corrector(mesh, run.u_star, field, truth, 0.05, 80);
    CHECK_FALSE(c.under_resolved);
    for (const auto& s : c.samples) CHECK(std::abs(s.u_corrected - s.u_star) <= 1e-12);
  }

  TEST_CASE("corrector amplitude scales linearly with epsilon") {
    const MacroMesh mesh(4);
    const ParamField field = ParamField::uniform(fx().box, CellParam{0.2, 0.8, 0.3, 0.7, -0.8});
    const RbProvider rb(fx().basis, fx().system.mesh());
    const HomogenizedRun run = run_homogenized(mesh, field, rb);
    std::vector<double> amplitude;
    for (double eps : {0.1, 0.05, 0.025}) {
      const CorrectorField c = reconstruct_corrector(mesh, run.u_star, field, rb, eps, 400);
      double a = 0.0;
      for (const auto& s : c.samples) a = std::max(a, std::abs(s.u_corrected - s.u_star));
      amplitude.push_back(a / eps);
    }
    CHECK(amplitude[1] == doctest::Approx(amplitude[0]).epsilon(0.1));
    CHECK(amplitude[2] == doctest::Approx(amplitude[0]).epsilon(0.1));
  }

  TEST_CASE("corrector is epsilon-periodic where the gradient is constant") {
    const MacroMesh mesh(2);
    const ParamField field = ParamField::uniform(fx().box, CellParam{0.2, 0.8, 0.3, 0.7, -0.8});
    const RbProvider rb(fx().basis, fx().system.mesh());
    const HomogenizedRun run = run_homogenized(mesh, field, rb);
    const int m = 200;  // spacing 1/200, epsilon spans 10 samples
    const CorrectorField c = reconstruct_corrector(mesh, run.u_star, field, rb, 0.05, m);
    for (int a = 0; a + 10 < 40; ++a) {
      const auto& s0 = c.samples[static_cast<std::size_t>(2 * m + a)];
      const auto& s1 = c.samples[static_cast<std::size_t>(2 * m + a + 10)];
      REQUIRE(s0.grad == s1.grad);
      CHECK((s1.u_corrected - s1.u_star) == doctest::Approx(s0.u_corrected - s0.u_star).epsilon(1e-9));
    }
  }

  TEST_CASE("coarse corrector grid is flagged") {
    const MacroMesh mesh(2);
    const ParamField field = ParamField::analytic({0.1, 0.0});
    const TruthProvider truth(fx().system);
    const HomogenizedRun run = run_homogenized(mesh, field, truth);
    CHECK(reconstruct_corrector(mesh, run.u_star, field, truth, 0.02, 100).under_resolved);
    CHECK_THROWS_AS(reconstruct_corrector(mesh, run.u_star, field, truth, 0.0, 100), ValidationError);
  }

  TEST_CASE("norms of known P1 functions") {
    const MacroMesh mesh(10);
    Vector u(mesh.node_count());
    for (std::size_t l = 0; l < mesh.node_count(); ++l) u[static_cast<Eigen::Index>(l)] = mesh.node_coords(static_cast<int>(l)).x1;
    const MacroNorms n = macro_norms(mesh, u);
    CHECK(n.h1_semi == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(n.l2 == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-13));
  }
}
