#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stcutfem/assembly.hpp"
#include "stcutfem/problems.hpp"
#include "stcutfem/solver.hpp"

using namespace stcutfem;

namespace {

// Everything needed to run the assembler on one slab, with the geometry
// pipeline identical to the solver's.
struct SlabRig {
  BackgroundMesh mesh;
  NodeLattice lattice;
  SlabLevelsetLin lin;
  ActiveSets active;
  std::vector<int> ghost_facets;
  SlabDeformation def;
  CoupledSpace space;
};

SlabRig make_rig(const LevelsetField& phi, double h_target, int k, double t0,
                 double t1, double strip) {
  SlabRig r;
  r.mesh = build_structured_mesh(h_target);
  r.lattice = build_node_lattice(r.mesh, k);
  r.lin = interpolate_slab_levelset(phi, r.mesh, t0, t1, 1);
  r.active = classify_slab(r.lin, r.mesh, 7, strip);
  r.ghost_facets = build_facet_set(r.active, r.mesh);
  r.def = identity_deformation(r.mesh, r.lattice, t0, t1, 1);
  r.space = build_coupled_space(r.active, r.mesh, r.lattice, 1, t0, t1);
  return r;
}

ConvectionField constant_field(const Eigen::Vector2d& w0) {
  ConvectionField w;
  w.value = [w0](const Eigen::Vector2d&, double) { return w0; };
  w.jacobian = [](const Eigen::Vector2d&, double) {
    return Eigen::Matrix2d::Zero().eval();
  };
  return w;
}

// P1 element matrices from first principles: barycentric gradients via a
// 3x3 solve, closed-form mass and convection.
struct P1Element {
  double area;
  Eigen::Matrix<double, 2, 3> grad;  // grad of lambda_l in column l
  Eigen::Matrix3d mass;
};

P1Element p1_element(const std::array<Eigen::Vector2d, 3>& v) {
  P1Element el;
  Eigen::Matrix3d vander;
  for (int l = 0; l < 3; ++l) vander.row(l) << 1.0, v[l].x(), v[l].y();
  const Eigen::Matrix3d coef = vander.inverse();  // column l = lambda_l coeffs
  el.area = 0.5 * std::abs((v[1] - v[0]).x() * (v[2] - v[0]).y() -
                           (v[1] - v[0]).y() * (v[2] - v[0]).x());
  for (int l = 0; l < 3; ++l) el.grad.col(l) = coef.block<2, 1>(1, l);
  el.mass = el.area / 12.0 * (Eigen::Matrix3d::Ones() +
                              Eigen::Matrix3d::Identity());
  return el;
}

double max_abs_diff(const SpMat& a, const Eigen::MatrixXd& b) {
  return (Eigen::MatrixXd(a) - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("uncut slab matrices reduce to the tensor-product hand formula") {
  // Level set negative everywhere: no interface, no ghost facets, and the
  // slab form must collapse to time-matrix x P1-element tensor products.
  LevelsetField phi;
  phi.value = [](const Eigen::Vector2d&, double) { return -1.0; };
  const double dt = 0.25;
  SlabRig rig = make_rig(phi, 0.5, 1, 0.0, dt, 0.0);
  REQUIRE(rig.active.surface_elements.empty());
  REQUIRE(rig.ghost_facets.empty());
  REQUIRE(rig.space.bulk.n_space() == rig.lattice.n_nodes);

  ModelParams params;
  params.k_B = 0.37;
  const Eigen::Vector2d w0(0.3, -0.2);
  SlabAssembler asmr(rig.mesh, rig.lattice, rig.lin, rig.def, rig.active,
                     rig.ghost_facets, rig.space, params, constant_field(w0),
                     default_quad_config(1, 1, 1));

  // Time matrices for P1 Lobatto nodes on [0, dt]:
  //   Td(i,j) = int l_j' l_i,  Tm(i,j) = int l_i l_j.
  Eigen::Matrix2d Td, Tm;
  Td << -0.5, 0.5, -0.5, 0.5;
  Tm << 2.0, 1.0, 1.0, 2.0;
  Tm *= dt / 6.0;

  const int n = rig.space.n_dofs();
  Eigen::MatrixXd bulk_ref = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd trace_ref = Eigen::MatrixXd::Zero(n, n);
  for (size_t e = 0; e < rig.mesh.elements.size(); ++e) {
    std::array<Eigen::Vector2d, 3> v;
    std::array<int, 3> rank;
    for (int l = 0; l < 3; ++l) {
      const int g = rig.lattice.element_nodes(static_cast<int>(e), l);
      v[l] = rig.lattice.coords[g];
      rank[l] = rig.space.bulk.node_rank[g];
    }
    const P1Element el = p1_element(v);
    for (int lr = 0; lr < 3; ++lr) {
      for (int ls = 0; ls < 3; ++ls) {
        const double stiff =
            params.k_B * el.area * el.grad.col(lr).dot(el.grad.col(ls));
        const double conv = w0.dot(el.grad.col(ls)) * el.area / 3.0;
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            bulk_ref(2 * rank[lr] + i, 2 * rank[ls] + j) +=
                Td(i, j) * el.mass(lr, ls) + Tm(i, j) * (stiff + conv);
          }
        }
        trace_ref(2 * rank[lr], 2 * rank[ls]) += params.b_B * el.mass(lr, ls);
      }
    }
  }

  CHECK(max_abs_diff(asmr.matrix_bulk(), bulk_ref) < 1e-13);
  CHECK(max_abs_diff(asmr.matrix_trace_mass(), trace_ref) < 1e-13);
  CHECK(asmr.bulk_slab_measure() == doctest::Approx(dt).epsilon(1e-12));
  CHECK(asmr.begin_slice_area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ghost penalty matches the closed form on one facet patch") {
  // Two triangles sharing the diagonal of the unit square.  Nodal values
  // 0,0,0,1 give element polynomials 0 and x+y-1, so the extension jump is
  // x+y-1 on the whole patch and J(u,u) = scale * dt * int (x+y-1)^2 = 1/6.
  LevelsetField phi;
  phi.value = [](const Eigen::Vector2d&, double) { return -1.0; };
  const double dt = 0.2;
  SlabRig rig = make_rig(phi, 1.0, 1, 0.0, dt, 0.0);
  REQUIRE(rig.mesh.elements.size() == 2);

  int diag = -1;
  for (size_t f = 0; f < rig.mesh.facets.size(); ++f) {
    if (rig.mesh.facets[f].interior()) diag = static_cast<int>(f);
  }
  REQUIRE(diag >= 0);
  rig.ghost_facets = {diag};

  ModelParams params;
  params.gamma_B = 0.4;
  SlabAssembler asmr(rig.mesh, rig.lattice, rig.lin, rig.def, rig.active,
                     rig.ghost_facets, rig.space, params,
                     constant_field(Eigen::Vector2d::Zero()),
                     default_quad_config(1, 1, 1));
  const SpMat G = asmr.matrix_ghost();

  const double h = rig.mesh.h;
  const double scale = params.gamma_B / (h * h) * (1.0 + dt / h);

  auto nodal = [&](const std::function<double(const Eigen::Vector2d&)>& f) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(rig.space.n_dofs());
    for (int r = 0; r < rig.space.bulk.n_space(); ++r) {
      const double val = f(rig.lattice.coords[rig.space.bulk.rank_node[r]]);
      u[2 * r] = u[2 * r + 1] = val;
    }
    return u;
  };

  const Eigen::VectorXd u_jump = nodal([](const Eigen::Vector2d& x) {
    return x.x() + x.y() > 1.0 + 1e-12 ? 1.0 : 0.0;  // 1 only at (1,1)
  });
  CHECK(u_jump.dot(G * u_jump) ==
        doctest::Approx(scale * dt / 6.0).epsilon(1e-10));

  // A globally affine function has identical element polynomials: kernel.
  const Eigen::VectorXd u_affine =
      nodal([](const Eigen::Vector2d& x) { return 0.7 * x.x() - 0.2 * x.y(); });
  CHECK((G * u_affine).cwiseAbs().maxCoeff() < 1e-13);

  // Symmetric positive semidefinite.
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(rig.space.n_dofs());
    for (int i = 0; i < x.size(); ++i) x[i] = dist(gen);
    CHECK(x.dot(G * x) >= -1e-13);
  }
  const Eigen::MatrixXd Gd(G);
  CHECK((Gd - Gd.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("normal-gradient stabilization matches the planar closed form") {
  // Static vertical interface x = 0.3 cutting four elements of a 2x2 grid.
  // For u_S = x the normal derivative is 1, so the form equals
  // (gamma_S / h) * dt * vol(cut elements) = scale * dt * 0.5.
  LevelsetField phi;
  phi.value = [](const Eigen::Vector2d& x, double) { return x.x() - 0.3; };
  const double dt = 0.125;
  SlabRig rig = make_rig(phi, 0.5, 1, 0.0, dt, 0.0);
  REQUIRE(rig.active.surface_elements.size() == 4);

  ModelParams params;
  params.gamma_S = 0.8;
  SlabAssembler asmr(rig.mesh, rig.lattice, rig.lin, rig.def, rig.active,
                     rig.ghost_facets, rig.space, params,
                     constant_field(Eigen::Vector2d::Zero()),
                     default_quad_config(1, 1, 1));
  const SpMat S = asmr.matrix_normal_stab();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(rig.space.n_dofs());
  const int off = rig.space.surf_offset();
  for (int r = 0; r < rig.space.surf.n_space(); ++r) {
    const double val = rig.lattice.coords[rig.space.surf.rank_node[r]].x();
    u[off + 2 * r] = u[off + 2 * r + 1] = val;
  }
  const double want = params.gamma_S / rig.mesh.h * dt * 0.5;
  CHECK(u.dot(S * u) == doctest::Approx(want).epsilon(1e-12));

  // Planar geometry closed forms for the measure helpers.
  CHECK(asmr.begin_slice_area() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(asmr.begin_slice_length() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(asmr.surface_slab_measure() == doctest::Approx(dt).epsilon(1e-12));
  CHECK(asmr.bulk_slab_measure() == doctest::Approx(0.3 * dt).epsilon(1e-12));
}

TEST_CASE("slab operator is exact on the constant pair") {
  // On the rotating-hole benchmark every term of the operator must vanish
  // on (u_B, u_S) = (c, c): transport of a constant, diffusion, both
  // stabilizations, and the exchange difference; the begin-slice mass is
  // cancelled by the upwind data read from the same constant.
  ManufacturedProblem problem = build_manufactured_case(Model::Henry);
  const double dt = 0.0625;
  BackgroundMesh mesh = build_structured_mesh(0.1);
  NodeLattice lattice = build_node_lattice(mesh, 1);
  SlabLevelsetLin lin = interpolate_slab_levelset(problem.phi, mesh, 0.0, dt, 1);
  ActiveSets active = classify_slab(lin, mesh, 7, problem.w_inf * dt);
  std::vector<int> ghost_facets = build_facet_set(active, mesh);
  SlabDeformation def = identity_deformation(mesh, lattice, 0.0, dt, 1);
  CoupledSpace space = build_coupled_space(active, mesh, lattice, 1, 0.0, dt);

  ModelParams params = problem.params;
  SlabAssembler asmr(mesh, lattice, lin, def, active, ghost_facets, space,
                     params, problem.w, default_quad_config(1, 1, 1));

  const double c = 0.7;
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(space.n_dofs(), c);
  const Eigen::VectorXd bulk_trace =
      Eigen::VectorXd::Constant(space.bulk.n_space(), c);
  const Eigen::VectorXd surf_trace =
      Eigen::VectorXd::Constant(space.surf.n_space(), c);

  const Eigen::VectorXd residual =
      asmr.linear_matrix() * u -
      asmr.rhs_upwind(space.bulk, bulk_trace, space.surf, surf_trace);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);

  // The combined matrix is exactly the documented sum of its parts.
  const Eigen::MatrixXd parts =
      params.b_B * Eigen::MatrixXd(asmr.matrix_bulk()) +
      params.b_S * Eigen::MatrixXd(asmr.matrix_surface()) +
      Eigen::MatrixXd(asmr.matrix_trace_mass()) +
      Eigen::MatrixXd(asmr.matrix_ghost()) +
      Eigen::MatrixXd(asmr.matrix_normal_stab()) +
      Eigen::MatrixXd(asmr.matrix_coupling());
  CHECK(max_abs_diff(asmr.linear_matrix(), parts) < 1e-13);

  // The symmetric stabilization and exchange blocks are positive
  // semidefinite; this is what makes them safe to add.
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const SpMat& m : {asmr.matrix_ghost(), asmr.matrix_normal_stab(),
                         asmr.matrix_coupling(), asmr.matrix_trace_mass()}) {
    const Eigen::MatrixXd md(m);
    CHECK((md - md.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd x(space.n_dofs());
      for (int i = 0; i < x.size(); ++i) x[i] = dist(gen);
      CHECK(x.dot(md * x) >= -1e-11);
    }
  }
}

TEST_CASE("exchange terms see only the surface slab") {
  // With u_B = 1, u_S = 0 the exchange form integrates b_B^2 over the
  // space-time surface; compare against the measure helper.
  LevelsetField phi;
  phi.value = [](const Eigen::Vector2d& x, double) { return x.x() - 0.3; };
  const double dt = 0.125;
  SlabRig rig = make_rig(phi, 0.5, 1, 0.0, dt, 0.0);

  ModelParams params;
  params.b_B = 1.3;
  params.b_S = 0.6;
  SlabAssembler asmr(rig.mesh, rig.lattice, rig.lin, rig.def, rig.active,
                     rig.ghost_facets, rig.space, params,
                     constant_field(Eigen::Vector2d::Zero()),
                     default_quad_config(1, 1, 1));

  Eigen::VectorXd u = Eigen::VectorXd::Zero(rig.space.n_dofs());
  u.head(rig.space.bulk.n_dofs()).setConstant(1.0);
  const double got = u.dot(asmr.matrix_coupling() * u);
  const double want = params.b_B * params.b_B * asmr.surface_slab_measure();
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}
