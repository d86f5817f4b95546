#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stcutfem/lagrange.hpp"
#include "stcutfem/levelset.hpp"
#include "stcutfem/mesh.hpp"

namespace stcutfem {

/// Continuous nodal interpolant of the exact level set, degree q_s in space
/// on a NodeLattice, sampled at the temporal Lobatto nodes of one slab.
struct LevelsetHi {
  const NodeLattice* lattice = nullptr;
  std::vector<double> time_nodes;
  Eigen::MatrixXd node_values;  // (n_nodes, n_time_nodes)

  /// Evaluate with element's own polynomial at reference coords (valid as
  /// extension outside the element too) and fixed time-node index.
  double value(int element, const Eigen::Vector2d& ref, int time_index) const;
  Eigen::Vector2d ref_gradient(int element, const Eigen::Vector2d& ref,
                               int time_index) const;
};

LevelsetHi interpolate_ho_levelset(const LevelsetField& phi,
                                   const BackgroundMesh& mesh,
                                   const NodeLattice& lattice, double t_begin,
                                   double t_end, int order_t);

/// Geometry data at one space-time quadrature point of a deformed element.
struct MapFrame {
  Eigen::Vector2d x;   // physical position Theta(xi, t)
  Eigen::Matrix2d J;   // d Theta / d xi (includes the affine part)
  Eigen::Matrix2d JinvT;
  double detJ = 1.0;
  Eigen::Vector2d V;   // mesh velocity dTheta/dt at fixed xi
};

/// Time-dependent displacement field moving the piecewise-linear interface
/// onto the higher-order one.  Identity outside the one-layer support of the
/// cut elements; identity everywhere for degree-1 geometry.
struct SlabDeformation {
  const BackgroundMesh* mesh = nullptr;
  const NodeLattice* lattice = nullptr;  // degree q_s
  double t_begin = 0.0, t_end = 0.0;
  std::vector<double> time_nodes;        // Lobatto, q_t + 1
  bool identity = true;
  // Nodal displacement per time node; empty matrices when identity.
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>> node_disp;
  int root_find_failures = 0;

  MapFrame frame(int element, const Eigen::Vector2d& ref, double t) const;
  /// Displacement of a lattice node at time t (0 when identity).
  Eigen::Vector2d node_displacement(int node, double t) const;
};

/// Root-find along G = grad(phi_hi) so that phi_hi(x + alpha G, t_j) matches
/// phi_lin(x, t_j) at every lattice node of every cut element; nodal averaging
/// over candidate values, zero on the support boundary.
SlabDeformation build_slab_deformation(const LevelsetHi& phi_hi,
                                       const SlabLevelsetLin& phi_lin,
                                       const ActiveSets& active,
                                       const BackgroundMesh& mesh,
                                       const NodeLattice& lattice);

/// Identity deformation for degree-1 geometry (and tests).
SlabDeformation identity_deformation(const BackgroundMesh& mesh,
                                     const NodeLattice& lattice,
                                     double t_begin, double t_end,
                                     int order_t);

/// n_h = J^{-T} n_ref / |J^{-T} n_ref| with n_ref the unit reference normal
/// of the linear interface; also returns the interface measure factor
/// detJ * |J^{-T} n_ref| relating reference chord length to the mapped one.
struct SurfaceFrame {
  Eigen::Vector2d normal;
  double measure_factor = 1.0;
};
SurfaceFrame surface_frame(const MapFrame& f, const Eigen::Vector2d& ref_grad_lin);

}  // namespace stcutfem
