#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "rbhom/errors.hpp"
#include "rbhom/fe.hpp"

using namespace rbhom;

namespace {

Eigen::MatrixXd dense(const SparseSpd& m) { return Eigen::MatrixXd(m); }

Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

}  // namespace

TEST_SUITE("fe") {
  TEST_CASE("block stiffness matrices sum to the single-pass Laplacian") {
    for (int n : {4, 8}) {
      const PeriodicMesh mesh(n);
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n * n, n * n);
      for (int k = 0; k < kBlockCount; ++k) {
        for (auto d : {Direction::e1, Direction::e2}) sum += dense(assemble_block_stiffness(mesh, k, d));
      }
      const Eigen::MatrixXd lap = dense(assemble_laplacian(mesh));
      CHECK((sum - lap).cwiseAbs().maxCoeff() <= 1e-14 * lap.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("block matrices are symmetric, semidefinite and annihilate constants") {
    const PeriodicMesh mesh(8);
    const Vector ones = Vector::Ones(64);
    for (int k = 0; k < kBlockCount; ++k) {
      for (auto d : {Direction::e1, Direction::e2}) {
        const SparseSpd m = assemble_block_stiffness(mesh, k, d);
        const Eigen::MatrixXd md = dense(m);
        CHECK((md - md.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((m * ones).cwiseAbs().maxCoeff() <= 1e-13);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(md);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
      }
    }
  }

  TEST_CASE("center block direction 1 at n_per_side 4 matches per-element quadrature") {
    const PeriodicMesh mesh(4);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(16, 16);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto v = oracle::vertices(mesh, e);
      const Eigen::Vector2d bc = (v[0] + v[1] + v[2]) / 3.0;
      if (!(bc.x() > 0.25 && bc.x() < 0.75 && bc.y() > 0.25 && bc.y() < 0.75)) continue;
      double area = 0.0;
      const auto g = oracle::hat_gradients(v, area);
      const auto& nodes = mesh.elements()[e].nodes;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) expected(nodes[a], nodes[b]) += area * g(0, a) * g(0, b);
      }
    }
    const Eigen::MatrixXd got = dense(assemble_block_stiffness(mesh, kCenterBlock, Direction::e1));
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(got.trace() == doctest::Approx(expected.trace()));
    CHECK(got.trace() > 0.0);
  }

  TEST_CASE("block loads sum to zero over blocks and over nodes") {
    const PeriodicMesh mesh(8);
    for (auto d : {Direction::e1, Direction::e2}) {
      Vector total = Vector::Zero(64);
      for (int k = 0; k < kBlockCount; ++k) {
        const Vector g = assemble_block_load(mesh, k, d);
        CHECK(std::abs(g.sum()) <= 1e-14);
        total += g;
      }
      CHECK(total.cwiseAbs().maxCoeff() <= 1e-14);
    }
  }

  TEST_CASE("center block load in direction 1 lives on the vertical faces") {
    const PeriodicMesh mesh(8);
    const Vector g = assemble_block_load(mesh, kCenterBlock, Direction::e1);
    int nonzero = 0;
    for (int l = 0; l < 64; ++l) {
      const double y1 = mesh.node_coords(l).x1;
      const bool on_face = std::abs(y1 - 0.25) < 1e-12 || std::abs(y1 - 0.75) < 1e-12;
      if (std::abs(g[l]) > 1e-14) {
        CHECK(on_face);
        ++nonzero;
      }
    }
    CHECK(nonzero > 0);
  }

  TEST_CASE("solve_spd: zero rhs, manufactured solution, incompatible rhs") {
    const PeriodicMesh mesh(8);
    const SparseSpd k = assemble_laplacian(mesh);
    CHECK(solve_spd(k, Vector::Zero(64)).norm() == 0.0);

    Vector v = random_vector(64, 3);
    v.array() -= v.mean();
    const Vector u = solve_spd(k, k * v);
    CHECK(u[0] == 0.0);
    const Vector diff = u - (v.array() - v[0]).matrix();
    CHECK(std::sqrt(h1_semi_inner(diff, diff, k)) <= 1e-10);

    Vector bad = k * v;
    bad.array() += 1e-3;
    CHECK_THROWS_AS(solve_spd(k, bad), ValidationError);
  }

  TEST_CASE("QuotientSolver meets its residual contract") {
    const PeriodicMesh mesh(16);
    const QuotientSolver solver(assemble_laplacian(mesh));
    Vector f = random_vector(256, 9);
    f.array() -= f.mean();
    const Vector u = solver.solve(f);
    // contract is against the full periodic matrix, pinned entry aside
    Vector r = solver.matrix() * u - f;
    CHECK(r.norm() <= 1e-10 * f.norm());
  }

  TEST_CASE("eliminated Laplacian is positive definite") {
    for (int n : {4, 8}) {
      const PeriodicMesh mesh(n);
      Eigen::MatrixXd k = dense(assemble_laplacian(mesh));
      k.row(0).setZero();
      k.col(0).setZero();
      k(0, 0) = 1.0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
      CHECK(eig.eigenvalues().minCoeff() > 1e-8);
    }
  }

  TEST_CASE("h1_semi_inner is symmetric, nonnegative, and vanishes on constants") {
    const PeriodicMesh mesh(8);
    const SparseSpd k = assemble_laplacian(mesh);
    const Vector ones = Vector::Ones(64);
    for (unsigned s = 0; s < 100; ++s) {
      const Vector u = random_vector(64, s);
      const Vector v = random_vector(64, s + 1000);
      CHECK(h1_semi_inner(u, u, k) >= 0.0);
      CHECK(std::abs(h1_semi_inner(ones, v, k)) <= 1e-12);
      CHECK(std::abs(h1_semi_inner(u, v, k) - h1_semi_inner(v, u, k)) <= 1e-14 * std::max(1.0, std::abs(h1_semi_inner(u, v, k))));
    }
    CHECK_THROWS_AS(h1_semi_inner(Vector::Ones(3), ones, k), ValidationError);
  }

  TEST_CASE("reference quadratic form equals direct quadrature of |grad v|^2") {
    const PeriodicMesh mesh(8);
    const SparseSpd k = assemble_laplacian(mesh);
    const Vector v = random_vector(64, 17);
    double direct = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      double area = 0.0;
      const auto g = oracle::hat_gradients(oracle::vertices(mesh, e), area);
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      for (int a = 0; a < 3; ++a) grad += v[mesh.elements()[e].nodes[a]] * g.col(a);
      direct += area * grad.squaredNorm();
    }
    CHECK(h1_semi_inner(v, v, k) == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("manufactured periodic solution converges at first order in the seminorm") {
    // -Lap u = f with u = sin(2 pi y1) sin(2 pi y2), f = 8 pi^2 u
    auto exact_grad = [](double y1, double y2) {
      const double w = 2.0 * M_PI;
      return Eigen::Vector2d(w * std::cos(w * y1) * std::sin(w * y2), w * std::sin(w * y1) * std::cos(w * y2));
    };
    auto forcing = [](double y1, double y2) {
      return 8.0 * M_PI * M_PI * std::sin(2.0 * M_PI * y1) * std::sin(2.0 * M_PI * y2);
    };
    std::vector<double> errors;
    for (int n : {8, 16, 32}) {
      const PeriodicMesh mesh(n);
      Vector f = Vector::Zero(n * n);
      for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto v = oracle::vertices(mesh, e);
        double area = 0.0;
        oracle::hat_gradients(v, area);
        // edge-midpoint rule, exact for quadratics
        for (int m = 0; m < 3; ++m) {
          const Eigen::Vector2d p = 0.5 * (v[m] + v[(m + 1) % 3]);
          const double fp = forcing(p.x(), p.y()) * area / 3.0;
          f[mesh.elements()[e].nodes[m]] += 0.5 * fp;
          f[mesh.elements()[e].nodes[(m + 1) % 3]] += 0.5 * fp;
        }
      }
      f.array() -= f.mean();
      const Vector u = solve_spd(assemble_laplacian(mesh), f);
      double err = 0.0;
      for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto v = oracle::vertices(mesh, e);
        double area = 0.0;
        const auto g = oracle::hat_gradients(v, area);
        Eigen::Vector2d gh = Eigen::Vector2d::Zero();
        for (int a = 0; a < 3; ++a) gh += u[mesh.elements()[e].nodes[a]] * g.col(a);
        for (int m = 0; m < 3; ++m) {
          const Eigen::Vector2d p = 0.5 * (v[m] + v[(m + 1) % 3]);
          err += area / 3.0 * (gh - exact_grad(p.x(), p.y())).squaredNorm();
        }
      }
      errors.push_back(std::sqrt(err));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double rate = std::log2(errors[i - 1] / errors[i]);
      CHECK(rate > 0.85);
      CHECK(rate < 1.3);
    }
  }
}
