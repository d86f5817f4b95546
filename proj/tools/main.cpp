#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "stcutfem/errors.hpp"
#include "stcutfem/study.hpp"

namespace {

stcutfem::Model parse_model(const std::string& name) {
  return name == "langmuir" ? stcutfem::Model::Langmuir
                            : stcutfem::Model::Henry;
}

void dump_system(const stcutfem::ManufacturedProblem& prob, int k,
                 int level, const std::string& path) {
  using namespace stcutfem;
  BackgroundMesh mesh = build_structured_mesh(0.2 * std::pow(0.5, level));
  TimePartition time = make_time_partition(prob.t_final, 1 << (level + 1));
  DiscretizationConfig disc = DiscretizationConfig::order(k);
  NodeLattice lattice = build_node_lattice(mesh, k);
  SlabContext ctx =
      build_slab_context(prob, mesh, lattice, lattice, time, 0, disc);
  SlabAssembler asmbl(mesh, lattice, ctx.lin, ctx.def, ctx.active,
                      ctx.ghost_facets, ctx.space, prob.params, prob.w,
                      default_quad_config(k, k, k));
  const SpMat A = asmbl.linear_matrix();
  std::ofstream os(path);
  os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  for (int c = 0; c < A.outerSize(); ++c) {
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unfitted space-time finite elements for coupled "
               "bulk-surface transport on moving geometries"};
  app.require_subcommand(1);

  std::string model_name = "henry";
  std::string out_dir = ".";
  std::string dump_mesh_path, dump_system_path;
  int k = 1, imax = 3, level = 0;
  bool deterministic = false, damped = false;

  auto model_check = CLI::IsMember({"henry", "langmuir"});
  CLI::App* study = app.add_subcommand(
      "study", "refinement sweep i = 0..imax, writes <out>/<model>_k<k>.csv");
  study->add_option("--model", model_name, "henry or langmuir")
      ->check(model_check);
  study->add_option("--k", k, "polynomial order in space and time")
      ->check(CLI::Range(1, 4));
  study->add_option("--imax", imax, "finest refinement level")
      ->check(CLI::Range(0, 8));
  study->add_option("--out", out_dir, "output directory for the CSV");
  study->add_flag("--deterministic", deterministic,
                  "kept for interface stability; assembly is always sequential");
  study->add_flag("--damped-newton", damped, "halve Newton steps on increase");

  CLI::App* verify =
      app.add_subcommand("verify", "run the built-in property checks");

  CLI::App* single =
      app.add_subcommand("single", "one (k, i) run, prints the error row");
  single->add_option("--model", model_name, "henry or langmuir")
      ->check(model_check);
  single->add_option("--k", k, "polynomial order in space and time")
      ->check(CLI::Range(1, 4));
  single->add_option("--i", level, "refinement level")->check(CLI::Range(0, 8));
  single->add_flag("--damped-newton", damped, "halve Newton steps on increase");
  single->add_option("--dump-mesh", dump_mesh_path,
                     "write the background mesh as plain text");
  single->add_option("--dump-system", dump_system_path,
                     "write the first slab matrix as triplets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (study->parsed()) {
      stcutfem::StudyConfig cfg;
      cfg.model = parse_model(model_name);
      cfg.k = k;
      cfg.imax = imax;
      cfg.out_dir = out_dir;
      cfg.deterministic = deterministic;
      cfg.damped_newton = damped;
      const auto rows = stcutfem::run_convergence_study(cfg, std::cout);
      std::cout << "wrote " << stcutfem::csv_path(cfg) << "\n";
      for (const auto& row : rows) {
        if (!row.err_bulk) return 2;
      }
      return 0;
    }
    if (verify->parsed()) {
      return stcutfem::verify_suite(std::cout) ? 0 : 1;
    }
    if (single->parsed()) {
      const auto prob = stcutfem::build_manufactured_case(parse_model(model_name));
      if (!dump_mesh_path.empty()) {
        stcutfem::BackgroundMesh mesh =
            stcutfem::build_structured_mesh(0.2 * std::pow(0.5, level));
        std::ofstream os(dump_mesh_path);
        mesh.dump(os);
      }
      if (!dump_system_path.empty()) {
        dump_system(prob, k, level, dump_system_path);
      }
      stcutfem::StudyConfig cfg;
      cfg.model = prob.model;
      cfg.k = k;
      cfg.damped_newton = damped;
      const auto row = stcutfem::run_single(prob, k, level, cfg);
      std::cout << "i=" << row.i << " h=" << row.h << " dt=" << row.dt
                << " err_bulk=" << *row.err_bulk << " err_surf=" << *row.err_surf
                << " max_newton=" << row.max_newton << " n_dofs=" << row.n_dofs
                << " runtime=" << row.runtime_s << "s\n";
      return 0;
    }
  } catch (const stcutfem::NewtonDiverged& err) {
    std::cerr << "diverged in slab " << err.slab << ": " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
