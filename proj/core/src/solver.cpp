#include "stcutfem/solver.hpp"

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

#include "stcutfem/errors.hpp"

namespace stcutfem {

Eigen::VectorXd solve_sparse(const SpMat& A, const Eigen::VectorXd& b) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SingularSystem("sparse LU factorization failed");
  }
  Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  auto bad = [&](const Eigen::VectorXd& y) {
    const double rn = (A * y - b).norm();
    return bn > 0.0 ? rn > 1e-10 * bn : rn > 1e-12;
  };
  if (bad(x)) {
    x += lu.solve(b - A * x);  // one refinement pass
    if (bad(x)) {
      throw SingularSystem("solve residual stayed above tolerance");
    }
  }
  return x;
}

int MarchStats::max_newton() const {
  int m = 0;
  for (int it : newton_iters) m = std::max(m, it);
  return m;
}

SlabContext build_slab_context(const ManufacturedProblem& problem,
                               const BackgroundMesh& mesh,
                               const NodeLattice& sol_lattice,
                               const NodeLattice& geom_lattice,
                               const TimePartition& time, int slab_index,
                               const DiscretizationConfig& disc) {
  SlabContext ctx;
  ctx.index = slab_index;
  const double t0 = time.slab_begin(slab_index);
  const double t1 = time.slab_end(slab_index);
  ctx.lin = interpolate_slab_levelset(problem.phi, mesh, t0, t1,
                                      disc.order_t_levelset);
  const int n_samples =
      disc.n_samples > 0 ? disc.n_samples : 2 * disc.order_t_levelset + 5;
  const double strip = disc.c_delta * problem.w_inf * time.dt;
  ctx.active = classify_slab(ctx.lin, mesh, n_samples, strip);
  ctx.ghost_facets = build_facet_set(ctx.active, mesh);
  ctx.hi = interpolate_ho_levelset(problem.phi, mesh, geom_lattice, t0, t1,
                                   disc.order_t_levelset);
  ctx.def = disc.q_geom >= 2
                ? build_slab_deformation(ctx.hi, ctx.lin, ctx.active, mesh,
                                         geom_lattice)
                : identity_deformation(mesh, geom_lattice, t0, t1,
                                       disc.order_t_levelset);
  ctx.space = build_coupled_space(ctx.active, mesh, sol_lattice, disc.k_t, t0, t1);
  return ctx;
}

NewtonResult newton_solve(const SpMat& A, const Eigen::VectorXd& rhs,
                          const SlabAssembler& assembler,
                          const Eigen::VectorXd& initial, double tol,
                          int maxiter, bool damped) {
  NewtonResult res;
  res.u = initial;
  double first_inc = -1.0;
  auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return A * u + assembler.quadratic_residual(u) - rhs;
  };
  Eigen::VectorXd F = residual(res.u);
  for (int it = 0; it < maxiter; ++it) {
    const SpMat DF = A + assembler.quadratic_jacobian(res.u);
    const Eigen::VectorXd step = solve_sparse(DF, F);
    const double inc = step.norm();
    if (!std::isfinite(inc)) {
      throw NewtonDiverged("non-finite Newton increment", -1);
    }
    if (first_inc < 0.0) first_inc = inc;
    if (inc > 1e6 * std::max(first_inc, 1e-300)) {
      throw NewtonDiverged("Newton increment grew by 1e6 over the first", -1);
    }
    double lambda = 1.0;
    Eigen::VectorXd u_next = res.u - step;
    Eigen::VectorXd F_next = residual(u_next);
    if (damped) {
      const double f0 = F.norm();
      for (int half = 0; half < 8 && F_next.norm() > f0; ++half) {
        lambda *= 0.5;
        u_next = res.u - lambda * step;
        F_next = residual(u_next);
      }
    }
    res.u = u_next;
    F = F_next;
    res.final_increment = lambda * inc;
    if (res.final_increment < tol) return res;
    ++res.iterations;
  }
  throw NewtonDiverged("Newton used its whole iteration budget", -1);
}

MarchResult march(const ManufacturedProblem& problem, const BackgroundMesh& mesh,
                  const TimePartition& time, const DiscretizationConfig& disc) {
  MarchResult result;
  result.sol_lattice =
      std::make_shared<NodeLattice>(build_node_lattice(mesh, disc.k_s));
  result.geom_lattice =
      disc.q_geom == disc.k_s
          ? result.sol_lattice
          : std::make_shared<NodeLattice>(build_node_lattice(mesh, disc.q_geom));
  const QuadConfig quad =
      default_quad_config(disc.k_s, disc.k_t, disc.order_t_levelset);

  SlabContext prev;
  Eigen::VectorXd prev_bulk_trace, prev_surf_trace;

  for (int n = 0; n < time.n_slabs; ++n) {
    const auto tick = std::chrono::steady_clock::now();
    SlabContext ctx = build_slab_context(problem, mesh, *result.sol_lattice,
                                         *result.geom_lattice, time, n, disc);
    SlabAssembler assembler(mesh, *result.sol_lattice, ctx.lin, ctx.def,
                            ctx.active, ctx.ghost_facets, ctx.space,
                            problem.params, problem.w, quad);

    if (n == 0) {
      // Slab 1 upwinds the nodally interpolated initial data, sampled at the
      // deformed node positions.
      prev_bulk_trace.resize(ctx.space.bulk.n_space());
      for (int r = 0; r < ctx.space.bulk.n_space(); ++r) {
        const int g = ctx.space.bulk.rank_node[r];
        const Eigen::Vector2d x = result.sol_lattice->coords[g] +
                                  ctx.def.node_displacement(g, time.nodes[0]);
        prev_bulk_trace[r] = problem.u_B_initial(x, time.nodes[0]);
      }
      prev_surf_trace.resize(ctx.space.surf.n_space());
      for (int r = 0; r < ctx.space.surf.n_space(); ++r) {
        const int g = ctx.space.surf.rank_node[r];
        const Eigen::Vector2d x = result.sol_lattice->coords[g] +
                                  ctx.def.node_displacement(g, time.nodes[0]);
        prev_surf_trace[r] = problem.u_S_initial(x, time.nodes[0]);
      }
    }
    const SpaceTimeSpace& old_bulk = n == 0 ? ctx.space.bulk : prev.space.bulk;
    const SpaceTimeSpace& old_surf = n == 0 ? ctx.space.surf : prev.space.surf;

    const SpMat A = assembler.linear_matrix();
    const Eigen::VectorXd rhs =
        assembler.rhs_sources(problem.f_B, problem.f_S, problem.outer_flux) +
        assembler.rhs_upwind(old_bulk, prev_bulk_trace, old_surf,
                             prev_surf_trace, n == 0 ? &ctx.def : &prev.def);

    Eigen::VectorXd u;
    if (problem.model == Model::Henry || problem.params.b_BS == 0.0) {
      u = solve_sparse(A, rhs);
      result.stats.newton_iters.push_back(1);
      result.stats.final_increment.push_back(
          (A * u - rhs).norm() / std::max(rhs.norm(), 1e-300));
    } else {
      // Constant-in-time extension of the incoming traces as Newton guess.
      std::vector<int> uncovered;
      const Eigen::VectorXd gb =
          transfer_trace(old_bulk, prev_bulk_trace, ctx.space.bulk, &uncovered);
      const Eigen::VectorXd gs =
          transfer_trace(old_surf, prev_surf_trace, ctx.space.surf, &uncovered);
      result.stats.transfer_uncovered += static_cast<int>(uncovered.size());
      Eigen::VectorXd guess(ctx.space.n_dofs());
      const int nt = ctx.space.bulk.n_time();
      for (int r = 0; r < ctx.space.bulk.n_space(); ++r) {
        for (int j = 0; j < nt; ++j) guess[r * nt + j] = gb[r];
      }
      const int off = ctx.space.surf_offset();
      for (int r = 0; r < ctx.space.surf.n_space(); ++r) {
        for (int j = 0; j < nt; ++j) guess[off + r * nt + j] = gs[r];
      }
      try {
        NewtonResult nres =
            newton_solve(A, rhs, assembler, guess, disc.newton_tol,
                         disc.newton_maxiter, disc.damped_newton);
        u = std::move(nres.u);
        result.stats.newton_iters.push_back(nres.iterations);
        result.stats.final_increment.push_back(nres.final_increment);
      } catch (const NewtonDiverged& err) {
        throw NewtonDiverged(err.what(), n);
      }
    }

    prev_bulk_trace = ctx.space.bulk.trace_at(u.head(ctx.space.bulk.n_dofs()),
                                              ctx.space.bulk.n_time() - 1);
    prev_surf_trace = ctx.space.surf.trace_at(
        u.segment(ctx.space.surf_offset(), ctx.space.surf.n_dofs()),
        ctx.space.surf.n_time() - 1);
    result.n_dofs_max = std::max(result.n_dofs_max,
                                 static_cast<long>(ctx.space.n_dofs()));
    prev = std::move(ctx);
    result.stats.slab_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick)
            .count());
  }

  result.final_bulk_trace = std::move(prev_bulk_trace);
  result.final_surf_trace = std::move(prev_surf_trace);
  result.final_slab = std::move(prev);
  return result;
}

}  // namespace stcutfem
