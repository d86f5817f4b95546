#include <benchmark/benchmark.h>

#include <random>

#include "stcutfem/problems.hpp"
#include "stcutfem/quadrature.hpp"
#include "stcutfem/solver.hpp"
#include "stcutfem/study.hpp"

using namespace stcutfem;

static void BM_CutVolumeRule(benchmark::State& state) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<std::array<double, 3>> cases;
  for (int i = 0; i < 256; ++i) {
    cases.push_back({unif(rng), unif(rng), unif(rng)});
  }
  size_t i = 0;
  for (auto _ : state) {
    QuadRule r = cut_triangle_rule(perturb_degenerate(cases[i++ & 255]),
                                   QuadRule::Tag::VolNeg, 4);
    benchmark::DoNotOptimize(r.weights.data());
  }
}
BENCHMARK(BM_CutVolumeRule);

namespace {

struct SlabFixture {
  ManufacturedProblem problem = build_manufactured_case(Model::Henry);
  BackgroundMesh mesh;
  TimePartition time;
  NodeLattice lattice;
  DiscretizationConfig disc = DiscretizationConfig::order(1);
  SlabContext ctx;

  explicit SlabFixture(int i)
      : mesh(build_structured_mesh(0.2 * std::pow(0.5, i))),
        time(make_time_partition(0.5, std::lround(0.5 / std::pow(0.5, i + 2)))),
        lattice(build_node_lattice(mesh, 1)),
        ctx(build_slab_context(problem, mesh, lattice, lattice, time, 0, disc)) {}

  SlabAssembler assembler() const {
    return SlabAssembler(mesh, lattice, ctx.lin, ctx.def, ctx.active,
                         ctx.ghost_facets, ctx.space, problem.params, problem.w,
                         default_quad_config(1, 1, 1));
  }
};

}  // namespace

static void BM_SlabContext(benchmark::State& state) {
  SlabFixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SlabContext ctx = build_slab_context(fix.problem, fix.mesh, fix.lattice,
                                         fix.lattice, fix.time, 0, fix.disc);
    benchmark::DoNotOptimize(ctx.active.bulk_elements.data());
  }
}
BENCHMARK(BM_SlabContext)->Arg(0)->Arg(1)->Arg(2);

static void BM_SlabMatrix(benchmark::State& state) {
  SlabFixture fix(static_cast<int>(state.range(0)));
  SlabAssembler assembler = fix.assembler();
  for (auto _ : state) {
    SpMat a = assembler.linear_matrix();
    benchmark::DoNotOptimize(a.valuePtr());
  }
}
BENCHMARK(BM_SlabMatrix)->Arg(0)->Arg(1)->Arg(2);

static void BM_SlabSolve(benchmark::State& state) {
  SlabFixture fix(static_cast<int>(state.range(0)));
  SlabAssembler assembler = fix.assembler();
  SpMat a = assembler.linear_matrix();
  Eigen::VectorXd rhs =
      assembler.rhs_sources(fix.problem.f_B, fix.problem.f_S, fix.problem.outer_flux);
  for (auto _ : state) {
    Eigen::VectorXd u = solve_sparse(a, rhs);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_SlabSolve)->Arg(0)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
