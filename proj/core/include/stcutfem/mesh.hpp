#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <vector>

namespace stcutfem {

/// Interior or boundary edge of the triangulation.  `elements[1] < 0` marks
/// a boundary facet.
struct Facet {
  std::array<int, 2> vertices{-1, -1};
  std::array<int, 2> elements{-1, -1};
  bool interior() const { return elements[1] >= 0; }
};

/// Affine data of one triangle: x(xi) = origin + A * xi.
struct ElementAffine {
  Eigen::Vector2d origin;
  Eigen::Matrix2d A;
  double det;                 // 2 * area, positive for CCW elements
  Eigen::Matrix2d inv_T;      // A^{-T}
};

/// Structured criss-cross triangulation of the unit square.  Every cell of
/// the n x n grid is split along the same diagonal, so all elements are
/// congruent and h equals the diagonal length.
struct BackgroundMesh {
  int grid_n = 0;
  double h = 0.0;  // longest edge over all elements
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> elements;        // CCW vertex ids
  std::vector<Facet> facets;
  std::vector<std::array<int, 3>> element_facets;  // facet i opposite vertex i
  std::vector<std::array<int, 3>> neighbors;       // across facet i, -1 on boundary

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }

  double element_area(int e) const;
  ElementAffine affine(int e) const;
  /// Reference coordinates of physical point x in element e (affine inverse;
  /// valid outside the element as polynomial extension).
  Eigen::Vector2d reference_coords(int e, const Eigen::Vector2d& x) const;
  bool vertex_on_boundary(int v) const;

  /// Plain-text dump: vertex lines then element lines.
  void dump(std::ostream& os) const;
};

/// Mesh for the unit square with n = ceil(1 / h_target) cells per side.
BackgroundMesh build_structured_mesh(double h_target);

/// Two-element patch around an interior facet.
struct FacetPatch {
  int facet = -1;
  std::array<int, 2> elements{-1, -1};
};

/// Patches for every interior facet, ordered by facet id.
std::vector<FacetPatch> build_facet_patches(const BackgroundMesh& mesh);

/// Uniform partition of [0, t_final] into n_slabs slabs.
struct TimePartition {
  double t_final = 0.0;
  int n_slabs = 0;
  double dt = 0.0;
  std::vector<double> nodes;  // n_slabs + 1 entries, nodes.front() = 0

  double slab_begin(int n) const { return nodes[n]; }  // slabs indexed from 0
  double slab_end(int n) const { return nodes[n + 1]; }
};

TimePartition make_time_partition(double t_final, int n_slabs);

}  // namespace stcutfem
