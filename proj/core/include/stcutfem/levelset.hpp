#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "stcutfem/mesh.hpp"

namespace stcutfem {

/// Smooth level set and companion data as user-supplied closures.
struct LevelsetField {
  std::function<double(const Eigen::Vector2d&, double)> value;
};

/// Element-piecewise-linear-in-space level set on one slab: per mesh vertex a
/// degree-q polynomial in time stored as values at the q+1 Gauss-Lobatto
/// nodes of [t_begin, t_end].
struct SlabLevelsetLin {
  double t_begin = 0.0, t_end = 0.0;
  int order = 1;                   // temporal degree q
  std::vector<double> time_nodes;  // q + 1 Lobatto nodes
  Eigen::MatrixXd vertex_values;   // (n_vertices, q + 1)

  double vertex_value(int v, double t) const;
  /// Temporal Lagrange weights at t (size q + 1), so a vertex value is
  /// vertex_values.row(v).dot(weights).
  Eigen::VectorXd time_weights(double t) const;
  std::array<double, 3> element_values(const BackgroundMesh& mesh, int element,
                                       double t) const;
};

SlabLevelsetLin interpolate_slab_levelset(const LevelsetField& phi,
                                          const BackgroundMesh& mesh,
                                          double t_begin, double t_end,
                                          int order);

enum class SignMark : char { Neg = 0, Pos = 1, Cut = 2 };

/// Active element sets of one slab.  bulk (E_Q) hosts the bulk space, surface
/// (E_G) the surface space; marks are time-resolved at the sample times.
struct ActiveSets {
  std::vector<int> bulk_elements;     // sorted element ids
  std::vector<int> surface_elements;  // sorted, subset of bulk_elements
  std::vector<char> in_bulk;          // size n_elements
  std::vector<char> in_surface;
  std::vector<char> fully_interior;   // NEG at every sample time
  std::vector<double> sample_times;   // uniform, endpoints included
  std::vector<std::vector<SignMark>> marks;  // [element][sample]
  int strip_dropped = 0;  // strip elements discarded by the connectivity filter
};

/// Classify one slab by sampling the vertex polynomials at n_samples uniform
/// times (endpoints included; n_samples >= 2*order + 5).  An element joins
/// E_Q when its min sampled vertex value is negative, or lies below
/// strip_width and the element connects to a negative element through the
/// strip; it joins E_G when some sample shows a sign change.
/// Throws EmptyActiveSet when E_Q comes out empty.
ActiveSets classify_slab(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                         int n_samples, double strip_width);

/// Ghost-penalty facet set: interior facets with both patch elements active
/// and at least one of them not fully interior.
std::vector<int> build_facet_set(const ActiveSets& active,
                                 const BackgroundMesh& mesh);

}  // namespace stcutfem
