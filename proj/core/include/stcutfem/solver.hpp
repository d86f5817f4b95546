#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "stcutfem/assembly.hpp"
#include "stcutfem/problems.hpp"

namespace stcutfem {

/// Sparse direct solve with a residual guard: one refinement pass, then
/// SingularSystem if the relative residual stays above 1e-10.
Eigen::VectorXd solve_sparse(const SpMat& A, const Eigen::VectorXd& b);

struct DiscretizationConfig {
  int k_s = 1;          // spatial solution order
  int k_t = 1;          // temporal solution order
  int q_geom = 1;       // spatial geometry order (1 = plain linear cuts)
  int order_t_levelset = 1;  // temporal level-set / deformation order
  double c_delta = 1.0;      // activation strip = c_delta * |w|_inf * dt
  int n_samples = 0;         // classification samples; 0 = 2*order_t + 5
  double newton_tol = 1e-9;
  int newton_maxiter = 25;
  bool damped_newton = false;

  static DiscretizationConfig order(int k) {
    DiscretizationConfig c;
    c.k_s = c.k_t = c.q_geom = c.order_t_levelset = k;
    return c;
  }
};

/// All geometric and discrete data of one slab (assembler built separately so
/// the context can be moved around freely).
struct SlabContext {
  int index = 0;
  SlabLevelsetLin lin;
  ActiveSets active;
  std::vector<int> ghost_facets;
  LevelsetHi hi;
  SlabDeformation def;
  CoupledSpace space;
};

SlabContext build_slab_context(const ManufacturedProblem& problem,
                               const BackgroundMesh& mesh,
                               const NodeLattice& sol_lattice,
                               const NodeLattice& geom_lattice,
                               const TimePartition& time, int slab_index,
                               const DiscretizationConfig& disc);

struct NewtonResult {
  Eigen::VectorXd u;
  int iterations = 0;       // increments at or above tolerance
  double final_increment = 0.0;
};

/// Plain Newton on F(u) = A u + quadratic(u) - rhs with the exact derivative;
/// counts increments >= tol, stops once an increment falls below.  Optional
/// step halving on residual-norm increase.  Throws NewtonDiverged.
NewtonResult newton_solve(const SpMat& A, const Eigen::VectorXd& rhs,
                          const SlabAssembler& assembler,
                          const Eigen::VectorXd& initial, double tol,
                          int maxiter, bool damped);

struct MarchStats {
  std::vector<int> newton_iters;         // per slab (1 for the linear model)
  std::vector<double> final_increment;   // Newton increment or linear residual
  std::vector<double> slab_seconds;
  int transfer_uncovered = 0;            // spatial nodes entering with value 0
  int max_newton() const;
};

struct MarchResult {
  std::shared_ptr<NodeLattice> sol_lattice;
  std::shared_ptr<NodeLattice> geom_lattice;
  SlabContext final_slab;
  Eigen::VectorXd final_bulk_trace;   // spatial coefficients at t = T
  Eigen::VectorXd final_surf_trace;
  long n_dofs_max = 0;
  MarchStats stats;
};

/// Slab-by-slab time marching.  Slab 1 receives nodally interpolated initial
/// data; later slabs consume the previous end trace.  NewtonDiverged carries
/// the slab index.
MarchResult march(const ManufacturedProblem& problem, const BackgroundMesh& mesh,
                  const TimePartition& time, const DiscretizationConfig& disc);

}  // namespace stcutfem
