#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stcutfem/solver.hpp"

namespace stcutfem {

struct StudyConfig {
  Model model = Model::Henry;
  int k = 1;
  int imax = 3;
  std::string out_dir = ".";
  bool deterministic = false;  // sequential assembly is always used; kept for CLI parity
  bool damped_newton = false;
  int q_geom = 0;          // 0 = same as k
  int order_t_levelset = 0;  // 0 = same as k
};

struct ConvergenceRow {
  int i = 0;
  double h = 0.0, dt = 0.0;
  std::optional<double> err_bulk, err_surf;  // absent when Newton diverged
  int max_newton = 0;
  long n_dofs = 0;
  double runtime_s = 0.0;
};

/// Final-time L2 errors of the bulk and surface traces on the mapped end
/// slice of the last slab.
std::pair<double, double> compute_final_errors(const ManufacturedProblem& problem,
                                               const BackgroundMesh& mesh,
                                               const MarchResult& result,
                                               int quad_degree);

/// One (k, i) run: mesh h = 0.2 * 0.5^i, dt = 0.5^(i+2), T = 0.5.
ConvergenceRow run_single(const ManufacturedProblem& problem, int k, int i,
                          const StudyConfig& cfg);

/// Refinement sweep i = 0..imax; writes <out_dir>/<model>_k<k>.csv and prints
/// rows plus pairwise EOC to `log`.  Diverged rows keep the study going.
std::vector<ConvergenceRow> run_convergence_study(const StudyConfig& cfg,
                                                  std::ostream& log);

std::string csv_path(const StudyConfig& cfg);
void write_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);
std::vector<ConvergenceRow> read_csv(const std::string& path);

/// log2(err_i / err_{i+1}) for consecutive present rows.
std::vector<double> eoc_pairwise(const std::vector<double>& errors);
/// Least-squares slope of log2(err) against refinement level.
double eoc_least_squares(const std::vector<double>& errors);

/// Built-in property checks (cut-rule exactness, geometry convergence,
/// manufactured-source cross-validation, derivative consistency).  Prints one
/// line per check; true when all pass.
bool verify_suite(std::ostream& log);

}  // namespace stcutfem
