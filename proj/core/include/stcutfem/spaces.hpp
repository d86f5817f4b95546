#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stcutfem/lagrange.hpp"
#include "stcutfem/levelset.hpp"
#include "stcutfem/mesh.hpp"

namespace stcutfem {

/// Tensor-product space-time FE space on the active elements of one slab:
/// continuous P^{k_s} in space restricted to the active set, P^{k_t} in time
/// with Gauss-Lobatto nodes so the slab-boundary traces are coefficient
/// slices.  Dof = spatial_rank * (k_t + 1) + time_index, spatial ranks
/// assigned lexicographically by node coordinate.
struct SpaceTimeSpace {
  const BackgroundMesh* mesh = nullptr;
  const NodeLattice* lattice = nullptr;
  int k_t = 1;
  double t_begin = 0.0, t_end = 0.0;
  std::vector<double> time_nodes;  // k_t + 1 Lobatto nodes (endpoint for k_t=0)
  std::vector<int> elements;       // active elements, ascending
  std::vector<char> element_active;
  std::vector<int> node_rank;      // lattice node -> spatial rank, -1 inactive
  std::vector<int> rank_node;      // spatial rank -> lattice node

  int n_space() const { return static_cast<int>(rank_node.size()); }
  int n_time() const { return k_t + 1; }
  int n_dofs() const { return n_space() * n_time(); }
  int dof(int lattice_node, int time_index) const {
    return node_rank[lattice_node] * n_time() + time_index;
  }
  bool active(int element) const { return element_active[element] != 0; }

  /// Value of the spatial trace (coefficients at one time index) at reference
  /// coords of an active element.
  double eval_trace(const Eigen::VectorXd& trace, int element,
                    const Eigen::Vector2d& ref) const;
  /// Extract the coefficients of time level j from a full space-time vector.
  Eigen::VectorXd trace_at(const Eigen::VectorXd& coeffs, int time_index) const;
};

SpaceTimeSpace build_space(const BackgroundMesh& mesh, const NodeLattice& lattice,
                           const std::vector<int>& active_elements, int k_t,
                           double t_begin, double t_end);

/// Stacked bulk (on E_Q) and surface (on E_G) spaces; surface dofs follow the
/// bulk block in every vector and matrix.
struct CoupledSpace {
  SpaceTimeSpace bulk;
  SpaceTimeSpace surf;
  int surf_offset() const { return bulk.n_dofs(); }
  int n_dofs() const { return bulk.n_dofs() + surf.n_dofs(); }
};

CoupledSpace build_coupled_space(const ActiveSets& active,
                                 const BackgroundMesh& mesh,
                                 const NodeLattice& lattice, int k_t,
                                 double t_begin, double t_end);

/// Spatial nodal interpolation of the previous slab's end trace into a new
/// slab's spatial space.  Nodes active in both spaces copy coefficients;
/// nodes with no previous value get 0 and are reported in `uncovered`.
Eigen::VectorXd transfer_trace(const SpaceTimeSpace& old_space,
                               const Eigen::VectorXd& old_trace,
                               const SpaceTimeSpace& new_space,
                               std::vector<int>* uncovered = nullptr);

}  // namespace stcutfem
