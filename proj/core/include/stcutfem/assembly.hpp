#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "stcutfem/mapping.hpp"
#include "stcutfem/quadrature.hpp"
#include "stcutfem/spaces.hpp"

namespace stcutfem {

using SpMat = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Eigen::Vector2d&, double)>;
/// Flux datum on the outer (fitted) boundary: (x, t, outward unit normal).
using BoundaryFlux =
    std::function<double(const Eigen::Vector2d&, double, const Eigen::Vector2d&)>;

struct ModelParams {
  double k_B = 1.0, k_S = 1.0;        // diffusivities
  double b_B = 1.0, b_S = 1.0;        // exchange weights (also scale the equations)
  double b_BS = 0.0;                  // bilinear exchange; 0 = linear model
  double gamma_B = 0.05, gamma_S = 0.05;
};

struct ConvectionField {
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> value;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&, double)> jacobian;  // (i,j) = dw_i/dx_j
};

struct QuadConfig {
  int space_degree = 4;       // cut volume/surface/slice rules
  int time_points = 4;        // Gauss points per slab for space-time rules
  int ghost_space_degree = 2; // facet-patch polynomial products
  int ghost_time_points = 2;  // temporal Gram
};

QuadConfig default_quad_config(int k_s, int k_t, int order_t_levelset);

/// Assembles the space-time slab system on a CoupledSpace: transport and
/// diffusion in bulk and on the surface, the time-upwind trace coupling,
/// ghost-penalty and normal-gradient stabilization, the surface exchange
/// terms, and the right-hand sides.  All integrals run over reference cut
/// geometry with mapping factors from the slab deformation.
class SlabAssembler {
 public:
  SlabAssembler(const BackgroundMesh& mesh, const NodeLattice& lattice,
                const SlabLevelsetLin& lin, const SlabDeformation& def,
                const ActiveSets& active, std::vector<int> ghost_facets,
                const CoupledSpace& space, const ModelParams& params,
                const ConvectionField& w, const QuadConfig& quad);

  int n_dofs() const { return space_.n_dofs(); }
  double dt() const { return lin_.t_end - lin_.t_begin; }

  // Individual forms (unscaled unless noted); dimensions all n_dofs x n_dofs.
  SpMat matrix_bulk() const;         // (dt u + w.grad u, v) + k_B (grad u, grad v) over the bulk slab
  SpMat matrix_surface() const;      // (dt u + w.grad u + u div_G w, v) + k_S (grad_G u, grad_G v) over the surface slab
  SpMat matrix_trace_mass() const;   // b_B (u+, v+) on the bulk slice + b_S on the surface slice at slab begin
  SpMat matrix_ghost() const;        // gamma_B/h^2 (1 + dt/h) volumetric extension jumps, bulk block
  SpMat matrix_normal_stab() const;  // (gamma_S/h) (n.grad u)(n.grad v) over the surface-active slab volume
  SpMat matrix_coupling() const;     // (b_B u_B - b_S u_S, b_B v_B - b_S v_S) on the surface slab
  /// b_B * bulk + b_S * surface + trace mass + ghost + normal stab + coupling.
  SpMat linear_matrix() const;

  /// b_B (f_B, v_B) + b_S (f_S, v_S); optional inhomogeneous Neumann datum on
  /// the outer boundary adds b_B (flux, v_B) over boundary facets x time.
  Eigen::VectorXd rhs_sources(const ScalarField& f_B, const ScalarField& f_S,
                              const BoundaryFlux& outer_flux = nullptr) const;
  /// Upwind data term over this slab's begin-slice rules.  The previous
  /// slab's deformation differs from the current one at the shared time
  /// (different active bands and slab-local level sets), so the old trace
  /// is read at the preimage of each quadrature point's physical position
  /// under old_def; nullptr means the deformations coincide.  Throws
  /// TransferOutOfDomain when a populated element was inactive before.
  Eigen::VectorXd rhs_upwind(const SpaceTimeSpace& old_bulk,
                             const Eigen::VectorXd& old_bulk_trace,
                             const SpaceTimeSpace& old_surf,
                             const Eigen::VectorXd& old_surf_trace,
                             const SlabDeformation* old_def = nullptr) const;

  // Bilinear exchange terms (zero when b_BS = 0).
  Eigen::VectorXd quadratic_residual(const Eigen::VectorXd& state) const;  // b_BS (uB uS, bS vS - bB vB)
  SpMat quadratic_jacobian(const Eigen::VectorXd& state) const;

  // Geometry sums, mostly for tests: mapped measures of this slab.
  double bulk_slab_measure() const;      // space-time volume
  double surface_slab_measure() const;   // space-time interface area
  double begin_slice_area() const;
  double begin_slice_length() const;

 private:
  const BackgroundMesh& mesh_;
  const NodeLattice& lattice_;
  const SlabLevelsetLin& lin_;
  const SlabDeformation& def_;
  const ActiveSets& active_;
  std::vector<int> ghost_facets_;
  const CoupledSpace& space_;
  ModelParams params_;
  ConvectionField w_;
  QuadConfig quad_;
  const TriangleBasis& basis_;
  LagrangeLine time_basis_;

  std::vector<QuadRule> vol_rules_;       // per element, empty when unused
  std::vector<QuadRule> surf_rules_;
  std::vector<QuadRule> slice_vol_;       // slab-begin slices
  std::vector<QuadRule> slice_if_;
};

}  // namespace stcutfem
