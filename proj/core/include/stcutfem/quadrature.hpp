#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace stcutfem {

/// One-dimensional rule on [0,1].
struct Quad1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with n points on [0,1]; exact for degree 2n-1.
Quad1D gauss_legendre(int n);

/// Gauss-Lobatto node set with n >= 2 points on [0,1], endpoints included.
/// Weights are the Lobatto quadrature weights (exact for degree 2n-3).
Quad1D gauss_lobatto(int n);

/// Quadrature rule in reference-triangle coordinates.  For space-time rules
/// `times` holds one physical time per point and the weights already contain
/// the temporal weight; for purely spatial rules `times` is empty.  Weights
/// sum to the measure of the represented reference region (sub-area for
/// volume tags, chord length for interface tags).
struct QuadRule {
  enum class Tag { VolNeg, Interface, SliceVol, SliceIf, Patch };
  Tag tag = Tag::VolNeg;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  std::vector<double> times;

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }
  double total_weight() const;
};

/// Rule over the full reference triangle {x,y >= 0, x+y <= 1}, exact for
/// bivariate polynomials up to `degree`.  Conical product of Gauss rules;
/// all weights positive, sum = 1/2.
QuadRule triangle_rule(int degree, QuadRule::Tag tag = QuadRule::Tag::VolNeg);

/// Vertex values closer to zero than this are snapped to +kDegeneracyBand
/// before cutting, so sub-polygon construction never divides by ~0.
inline constexpr double kDegeneracyBand = 1e-14;

/// Snap near-zero values deterministically to +kDegeneracyBand.
std::array<double, 3> perturb_degenerate(const std::array<double, 3>& phi);

/// Cut rule on the reference triangle for the linear level set interpolating
/// `vertex_phi` at vertices (0,0), (1,0), (0,1).  Tag selects the region:
/// a volume tag integrates {phi < 0}, an interface tag the zero chord.
/// `degree` is the exactly-integrated polynomial degree (volume case).
/// Throws DegenerateCut when all three values lie inside the degeneracy band.
QuadRule cut_triangle_rule(const std::array<double, 3>& vertex_phi,
                           QuadRule::Tag tag, int degree);

struct BackgroundMesh;
struct SlabLevelsetLin;

/// Space-time volume rule over {phi^lin < 0} in one element across a slab:
/// `n_time` Gauss-Legendre points in time, each carrying a spatial cut rule
/// of the given degree.  Weights include the temporal weight (scaled by the
/// slab length); spatial weights remain in reference-triangle measure.
QuadRule slab_volume_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                          int element, int degree, int n_time);

/// Same layout for the interface chord {phi^lin = 0}.
QuadRule slab_surface_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                           int element, int degree, int n_time);

/// Purely spatial cut rule at a fixed time t_star (tag SliceVol or SliceIf).
QuadRule slice_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                    int element, double t_star, QuadRule::Tag tag, int degree);

}  // namespace stcutfem
