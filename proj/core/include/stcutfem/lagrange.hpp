#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stcutfem/mesh.hpp"

namespace stcutfem {

/// Lagrange basis on the reference triangle of the given degree (nodes on the
/// barycentric lattice, enumerated j = 0..k outer, i = 0..k-j inner so node
/// (i,j) sits at (i/k, j/k)).  Basis functions are stored as monomial
/// coefficient rows, valid as polynomial extensions outside the triangle.
struct TriangleBasis {
  int degree = 0;
  int n_funcs = 0;
  Eigen::MatrixXd coeff;                    // (n_funcs, n_monomials)
  std::vector<std::array<int, 2>> powers;   // monomial exponents (px, py)
  std::vector<Eigen::Vector2d> nodes;       // lattice nodes in reference coords

  void eval(const Eigen::Vector2d& xi, Eigen::VectorXd& values) const;
  /// values plus reference gradients, grads is (n_funcs, 2).
  void eval_grad(const Eigen::Vector2d& xi, Eigen::VectorXd& values,
                 Eigen::MatrixXd& grads) const;
};

/// Shared immutable basis per degree (1..8).
const TriangleBasis& triangle_basis(int degree);

/// One-dimensional Lagrange basis on arbitrary distinct nodes.
struct LagrangeLine {
  std::vector<double> nodes;

  explicit LagrangeLine(std::vector<double> n) : nodes(std::move(n)) {}
  int size() const { return static_cast<int>(nodes.size()); }
  double value(int i, double t) const;
  double deriv(int i, double t) const;
  void eval_all(double t, Eigen::VectorXd& values) const;
  void eval_all_deriv(double t, Eigen::VectorXd& derivs) const;
};

/// Global continuous degree-k lattice over the whole mesh: unique node ids
/// with deterministic coordinates (edge nodes parametrized from the
/// smaller-id endpoint so both adjacent elements compute identical bits).
struct NodeLattice {
  int degree = 0;
  int n_nodes = 0;
  const BackgroundMesh* mesh = nullptr;
  std::vector<Eigen::Vector2d> coords;          // per global node
  Eigen::MatrixXi element_nodes;                // (n_elements, n_local)
  std::vector<std::vector<int>> node_elements;  // adjacency for transfer
  std::vector<char> on_boundary;                // node sits on the square edge

  int n_local() const { return (degree + 1) * (degree + 2) / 2; }
  /// Reference coordinates of local node l (exact rationals i/k, j/k).
  Eigen::Vector2d local_node_ref(int l) const;
};

NodeLattice build_node_lattice(const BackgroundMesh& mesh, int degree);

}  // namespace stcutfem
