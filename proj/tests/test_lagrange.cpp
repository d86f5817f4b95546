#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stcutfem/lagrange.hpp"

using namespace stcutfem;

TEST_CASE("triangle basis is nodal and a partition of unity") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 1; k <= 4; ++k) {
    const TriangleBasis& basis = triangle_basis(k);
    CHECK(basis.n_funcs == (k + 1) * (k + 2) / 2);
    Eigen::VectorXd vals;
    for (int i = 0; i < basis.n_funcs; ++i) {
      basis.eval(basis.nodes[i], vals);
      for (int j = 0; j < basis.n_funcs; ++j) {
        CHECK(vals[j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
      }
    }
    Eigen::MatrixXd grads;
    for (int trial = 0; trial < 20; ++trial) {
      double a = unif(rng), b = unif(rng) * (1.0 - a);
      basis.eval_grad(Eigen::Vector2d(a, b), vals, grads);
      CHECK(vals.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(grads.col(0).sum() == doctest::Approx(0.0).epsilon(1e-11));
      CHECK(grads.col(1).sum() == doctest::Approx(0.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("triangle basis node layout follows the lattice") {
  const TriangleBasis& b2 = triangle_basis(2);
  const Eigen::Vector2d expect[6] = {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0},
                                     {0.0, 0.5}, {0.5, 0.5}, {0.0, 1.0}};
  REQUIRE(b2.nodes.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK((b2.nodes[i] - expect[i]).norm() == 0.0);
  }
}

TEST_CASE("triangle basis reproduces polynomials up to its degree") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 1; k <= 4; ++k) {
    const TriangleBasis& basis = triangle_basis(k);
    Eigen::VectorXd vals;
    for (int px = 0; px + 0 <= k; ++px) {
      for (int py = 0; px + py <= k; ++py) {
        auto mono = [&](const Eigen::Vector2d& p) {
          return std::pow(p.x(), px) * std::pow(p.y(), py);
        };
        Eigen::VectorXd coeffs(basis.n_funcs);
        for (int i = 0; i < basis.n_funcs; ++i) coeffs[i] = mono(basis.nodes[i]);
        for (int trial = 0; trial < 5; ++trial) {
          double a = unif(rng), b = unif(rng) * (1.0 - a);
          Eigen::Vector2d p(a, b);
          basis.eval(p, vals);
          CHECK(coeffs.dot(vals) == doctest::Approx(mono(p)).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("triangle basis gradients match finite differences") {
  const TriangleBasis& basis = triangle_basis(3);
  Eigen::VectorXd vals;
  Eigen::MatrixXd grads;
  const Eigen::Vector2d p(0.31, 0.27);
  basis.eval_grad(p, vals, grads);
  const double d = 1e-3;
  for (int i = 0; i < basis.n_funcs; ++i) {
    auto f = [&](double x, double y) {
      Eigen::VectorXd v;
      basis.eval(Eigen::Vector2d(x, y), v);
      return v[i];
    };
    const double fd_x =
        oracle::d1_5pt([&](double s) { return f(p.x() + s, p.y()); }, d);
    const double fd_y =
        oracle::d1_5pt([&](double s) { return f(p.x(), p.y() + s); }, d);
    CHECK(grads(i, 0) == doctest::Approx(fd_x).epsilon(1e-8));
    CHECK(grads(i, 1) == doctest::Approx(fd_y).epsilon(1e-8));
  }
}

TEST_CASE("line basis is nodal and reproduces quadratics") {
  LagrangeLine line({0.0, 0.4, 1.0});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(line.value(i, line.nodes[j]) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
    }
  }
  auto f = [](double t) { return 3.0 * t * t - 2.0 * t + 1.0; };
  auto fp = [](double t) { return 6.0 * t - 2.0; };
  for (double t : {0.13, 0.5, 0.77, 1.2}) {
    double val = 0.0, der = 0.0;
    for (int i = 0; i < 3; ++i) {
      val += f(line.nodes[i]) * line.value(i, t);
      der += f(line.nodes[i]) * line.deriv(i, t);
    }
    CHECK(val == doctest::Approx(f(t)).epsilon(1e-12));
    CHECK(der == doctest::Approx(fp(t)).epsilon(1e-12));
  }
  Eigen::VectorXd v, d;
  line.eval_all(0.37, v);
  line.eval_all_deriv(0.37, d);
  for (int i = 0; i < 3; ++i) {
    CHECK(v[i] == doctest::Approx(line.value(i, 0.37)));
    CHECK(d[i] == doctest::Approx(line.deriv(i, 0.37)));
  }
}

TEST_CASE("single-node line degenerates to the constant basis") {
  LagrangeLine line({0.25});
  CHECK(line.value(0, 0.0) == 1.0);
  CHECK(line.value(0, 0.9) == 1.0);
  CHECK(line.deriv(0, 0.6) == 0.0);
}

TEST_CASE("node lattice counts per degree") {
  BackgroundMesh mesh = build_structured_mesh(0.5);
  const int nv = mesh.n_vertices(), nf = mesh.n_facets(),
            ne = mesh.n_elements();
  CHECK(build_node_lattice(mesh, 1).n_nodes == nv);
  CHECK(build_node_lattice(mesh, 2).n_nodes == nv + nf);
  CHECK(build_node_lattice(mesh, 3).n_nodes == nv + 2 * nf + ne);
  CHECK(build_node_lattice(mesh, 4).n_nodes == nv + 3 * nf + 3 * ne);
}

TEST_CASE("lattice coordinates agree with the element maps") {
  BackgroundMesh mesh = build_structured_mesh(0.34);
  for (int k : {1, 2, 3}) {
    NodeLattice lat = build_node_lattice(mesh, k);
    CHECK(lat.degree == k);
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const ElementAffine aff = mesh.affine(e);
      for (int l = 0; l < lat.n_local(); ++l) {
        const Eigen::Vector2d x = aff.origin + aff.A * lat.local_node_ref(l);
        const int g = lat.element_nodes(e, l);
        CHECK((lat.coords[g] - x).norm() < 1e-13);
        bool adjacent = false;
        for (int nb : lat.node_elements[g]) adjacent |= nb == e;
        CHECK(adjacent);
      }
    }
  }
}

TEST_CASE("lattice boundary flags match the geometry") {
  BackgroundMesh mesh = build_structured_mesh(0.5);
  NodeLattice lat = build_node_lattice(mesh, 3);
  for (int g = 0; g < lat.n_nodes; ++g) {
    const Eigen::Vector2d& p = lat.coords[g];
    const bool expect = std::abs(p.x()) < 1e-14 ||
                        std::abs(p.x() - 1.0) < 1e-14 ||
                        std::abs(p.y()) < 1e-14 ||
                        std::abs(p.y() - 1.0) < 1e-14;
    CHECK(static_cast<bool>(lat.on_boundary[g]) == expect);
  }
}
