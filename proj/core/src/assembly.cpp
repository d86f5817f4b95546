#include "stcutfem/assembly.hpp"

#include <cmath>
#include <limits>

#include "stcutfem/errors.hpp"

namespace stcutfem {

QuadConfig default_quad_config(int k_s, int k_t, int order_t_levelset) {
  QuadConfig q;
  q.space_degree = 2 * k_s + 2;
  q.time_points = k_t + order_t_levelset + 2;
  q.ghost_space_degree = 2 * k_s;
  q.ghost_time_points = k_t + 1;
  return q;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Space-time basis data at one quadrature point, flattened l * n_time + j.
struct DofEval {
  Eigen::VectorXd sval, tval, tder;
  Eigen::MatrixXd sgrad;   // reference gradients, n_local x 2
  Eigen::VectorXd val;
  Eigen::VectorXd dt_x;    // time derivative at fixed physical x
  Eigen::Matrix2Xd grad;   // physical gradients
};

void eval_point(const TriangleBasis& basis, const LagrangeLine& tb,
                const Eigen::Vector2d& ref, double t, const MapFrame* frame,
                bool need_grad, DofEval& d) {
  if (need_grad) {
    basis.eval_grad(ref, d.sval, d.sgrad);
  } else {
    basis.eval(ref, d.sval);
  }
  tb.eval_all(t, d.tval);
  const int nl = static_cast<int>(d.sval.size());
  const int nt = tb.size();
  d.val.resize(nl * nt);
  if (need_grad) {
    tb.eval_all_deriv(t, d.tder);
    d.dt_x.resize(nl * nt);
    d.grad.resize(2, nl * nt);
  }
  for (int l = 0; l < nl; ++l) {
    Eigen::Vector2d g;
    if (need_grad) g = frame->JinvT * d.sgrad.row(l).transpose();
    for (int j = 0; j < nt; ++j) {
      const int idx = l * nt + j;
      d.val[idx] = d.sval[l] * d.tval[j];
      if (need_grad) {
        d.grad.col(idx) = d.tval[j] * g;
        d.dt_x[idx] = d.sval[l] * d.tder[j] - d.grad.col(idx).dot(frame->V);
      }
    }
  }
}

/// Global dof ids of one element in one space component.
void element_dofs(const SpaceTimeSpace& sp, const NodeLattice& lattice,
                  int element, int offset, std::vector<int>& dofs) {
  const int nl = lattice.n_local();
  const int nt = sp.n_time();
  dofs.resize(nl * nt);
  for (int l = 0; l < nl; ++l) {
    const int g = lattice.element_nodes(element, l);
    for (int j = 0; j < nt; ++j) {
      dofs[l * nt + j] = offset + sp.dof(g, j);
    }
  }
}

void scatter(const std::vector<int>& rows, const std::vector<int>& cols,
             const Eigen::MatrixXd& local, Triplets& trips) {
  for (int a = 0; a < static_cast<int>(rows.size()); ++a) {
    for (int b = 0; b < static_cast<int>(cols.size()); ++b) {
      if (local(a, b) != 0.0) trips.emplace_back(rows[a], cols[b], local(a, b));
    }
  }
}

/// Reference gradient of the vertex-linear level set of one element at time t,
/// cached against consecutive points sharing the time.
struct LinGradCache {
  const SlabLevelsetLin& lin;
  const BackgroundMesh& mesh;
  int element;
  double last_t = std::numeric_limits<double>::quiet_NaN();
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();

  const Eigen::Vector2d& at(double t) {
    if (t != last_t) {
      const std::array<double, 3> lv = lin.element_values(mesh, element, t);
      grad = Eigen::Vector2d(lv[1] - lv[0], lv[2] - lv[0]);
      last_t = t;
    }
    return grad;
  }
};

}  // namespace

SlabAssembler::SlabAssembler(const BackgroundMesh& mesh,
                             const NodeLattice& lattice,
                             const SlabLevelsetLin& lin,
                             const SlabDeformation& def,
                             const ActiveSets& active,
                             std::vector<int> ghost_facets,
                             const CoupledSpace& space,
                             const ModelParams& params,
                             const ConvectionField& w, const QuadConfig& quad)
    : mesh_(mesh),
      lattice_(lattice),
      lin_(lin),
      def_(def),
      active_(active),
      ghost_facets_(std::move(ghost_facets)),
      space_(space),
      params_(params),
      w_(w),
      quad_(quad),
      basis_(triangle_basis(lattice.degree)),
      time_basis_(space.bulk.time_nodes) {
  vol_rules_.resize(mesh.n_elements());
  surf_rules_.resize(mesh.n_elements());
  slice_vol_.resize(mesh.n_elements());
  slice_if_.resize(mesh.n_elements());
  for (int e : space_.bulk.elements) {
    vol_rules_[e] =
        slab_volume_rule(lin, mesh, e, quad.space_degree, quad.time_points);
    slice_vol_[e] = slice_rule(lin, mesh, e, lin.t_begin,
                               QuadRule::Tag::SliceVol, quad.space_degree);
  }
  for (int e : space_.surf.elements) {
    surf_rules_[e] =
        slab_surface_rule(lin, mesh, e, quad.space_degree, quad.time_points);
    slice_if_[e] = slice_rule(lin, mesh, e, lin.t_begin, QuadRule::Tag::SliceIf,
                              quad.space_degree);
  }
}

SpMat SlabAssembler::matrix_bulk() const {
  Triplets trips;
  DofEval d;
  std::vector<int> dofs;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = vol_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.bulk, lattice_, e, 0, dofs);
    const int n = static_cast<int>(dofs.size());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      eval_point(basis_, time_basis_, rule.points[p], t, &f, true, d);
      const double m = rule.weights[p] * f.detJ;
      const Eigen::Vector2d wv = w_.value(f.x, t);
      for (int b = 0; b < n; ++b) {
        const double transport = d.dt_x[b] + wv.dot(d.grad.col(b));
        for (int a = 0; a < n; ++a) {
          local(a, b) += m * (transport * d.val[a] +
                              params_.k_B * d.grad.col(a).dot(d.grad.col(b)));
        }
      }
    }
    scatter(dofs, dofs, local, trips);
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::matrix_surface() const {
  Triplets trips;
  DofEval d;
  std::vector<int> dofs;
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = surf_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.surf, lattice_, e, off, dofs);
    const int n = static_cast<int>(dofs.size());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      const SurfaceFrame sf = surface_frame(f, lg.at(t));
      eval_point(basis_, time_basis_, rule.points[p], t, &f, true, d);
      const double m = rule.weights[p] * sf.measure_factor;
      const Eigen::Vector2d wv = w_.value(f.x, t);
      const Eigen::Matrix2d P =
          Eigen::Matrix2d::Identity() - sf.normal * sf.normal.transpose();
      const double div_g = (P * w_.jacobian(f.x, t)).trace();
      for (int b = 0; b < n; ++b) {
        const double transport =
            d.dt_x[b] + wv.dot(d.grad.col(b)) + div_g * d.val[b];
        const Eigen::Vector2d tgb = P * d.grad.col(b);
        for (int a = 0; a < n; ++a) {
          local(a, b) += m * (transport * d.val[a] +
                              params_.k_S * tgb.dot(d.grad.col(a)));
        }
      }
    }
    scatter(dofs, dofs, local, trips);
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::matrix_trace_mass() const {
  Triplets trips;
  DofEval d;
  std::vector<int> dofs;
  const double t0 = lin_.t_begin;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = slice_vol_[e];
    if (rule.empty()) continue;
    element_dofs(space_.bulk, lattice_, e, 0, dofs);
    const int n = static_cast<int>(dofs.size());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], t0);
      eval_point(basis_, time_basis_, rule.points[p], t0, nullptr, false, d);
      const double m = params_.b_B * rule.weights[p] * f.detJ;
      local += m * d.val * d.val.transpose();
    }
    scatter(dofs, dofs, local, trips);
  }
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = slice_if_[e];
    if (rule.empty()) continue;
    element_dofs(space_.surf, lattice_, e, off, dofs);
    const int n = static_cast<int>(dofs.size());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], t0);
      const SurfaceFrame sf = surface_frame(f, lg.at(t0));
      eval_point(basis_, time_basis_, rule.points[p], t0, nullptr, false, d);
      const double m = params_.b_S * rule.weights[p] * sf.measure_factor;
      local += m * d.val * d.val.transpose();
    }
    scatter(dofs, dofs, local, trips);
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::matrix_ghost() const {
  Triplets trips;
  const double h = mesh_.h;
  const double scale = params_.gamma_B / (h * h) * (1.0 + dt() / h);
  const int nt = space_.bulk.n_time();

  // Temporal Gram of the Lagrange time basis over the slab.
  Quad1D gt = gauss_legendre(quad_.ghost_time_points);
  Eigen::MatrixXd tg = Eigen::MatrixXd::Zero(nt, nt);
  Eigen::VectorXd tv;
  for (int q = 0; q < gt.size(); ++q) {
    const double t = lin_.t_begin + gt.nodes[q] * dt();
    time_basis_.eval_all(t, tv);
    tg += (gt.weights[q] * dt()) * tv * tv.transpose();
  }

  const QuadRule tri = triangle_rule(quad_.ghost_space_degree);
  const int nl = lattice_.n_local();
  Eigen::VectorXd v1(nl), v2(nl);
  for (int fid : ghost_facets_) {
    const std::array<int, 2> els = mesh_.facets[fid].elements;
    // Broken-dof jump Gram over the two-element patch: polynomial extensions
    // of both elements evaluated on either physical triangle.
    Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(2 * nl, 2 * nl);
    Eigen::VectorXd B(2 * nl);
    for (int side = 0; side < 2; ++side) {
      const int e = els[side];
      const ElementAffine aff = mesh_.affine(e);
      for (int p = 0; p < tri.size(); ++p) {
        const Eigen::Vector2d x = aff.origin + aff.A * tri.points[p];
        basis_.eval(mesh_.reference_coords(els[0], x), v1);
        basis_.eval(mesh_.reference_coords(els[1], x), v2);
        B.head(nl) = v1;
        B.tail(nl) = -v2;
        jump += (tri.weights[p] * std::abs(aff.det)) * B * B.transpose();
      }
    }
    std::array<std::vector<int>, 2> ranks;
    for (int side = 0; side < 2; ++side) {
      ranks[side].resize(nl);
      for (int l = 0; l < nl; ++l) {
        ranks[side][l] =
            space_.bulk.node_rank[lattice_.element_nodes(els[side], l)];
      }
    }
    for (int a = 0; a < 2 * nl; ++a) {
      const int ra = ranks[a / nl][a % nl];
      for (int b = 0; b < 2 * nl; ++b) {
        const int rb = ranks[b / nl][b % nl];
        if (jump(a, b) == 0.0) continue;
        for (int j = 0; j < nt; ++j) {
          for (int jp = 0; jp < nt; ++jp) {
            trips.emplace_back(ra * nt + j, rb * nt + jp,
                               scale * jump(a, b) * tg(j, jp));
          }
        }
      }
    }
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::matrix_normal_stab() const {
  Triplets trips;
  DofEval d;
  std::vector<int> dofs;
  const int off = space_.surf_offset();
  // 1/h weight: the normal-derivative control must dominate the transport
  // across the interface when the geometry does not move with w (the
  // production term scales with a trace inverse inequality, costing h^-1).
  const double scale = params_.gamma_S / mesh_.h;

  // Full space-time rule over the reference element, shared by all elements.
  const QuadRule tri = triangle_rule(quad_.space_degree);
  Quad1D gt = gauss_legendre(quad_.time_points);
  QuadRule rule;
  rule.tag = QuadRule::Tag::Patch;
  for (int q = 0; q < gt.size(); ++q) {
    const double t = lin_.t_begin + gt.nodes[q] * dt();
    for (int p = 0; p < tri.size(); ++p) {
      rule.points.push_back(tri.points[p]);
      rule.weights.push_back(tri.weights[p] * gt.weights[q] * dt());
      rule.times.push_back(t);
    }
  }

  for (int e : space_.surf.elements) {
    element_dofs(space_.surf, lattice_, e, off, dofs);
    const int n = static_cast<int>(dofs.size());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      const Eigen::Vector2d nrm = surface_frame(f, lg.at(t)).normal;
      eval_point(basis_, time_basis_, rule.points[p], t, &f, true, d);
      const double m = scale * rule.weights[p] * f.detJ;
      Eigen::VectorXd ng(n);
      for (int a = 0; a < n; ++a) ng[a] = nrm.dot(d.grad.col(a));
      local += m * ng * ng.transpose();
    }
    scatter(dofs, dofs, local, trips);
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::matrix_coupling() const {
  Triplets trips;
  DofEval d;
  std::vector<int> bdofs, sdofs;
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = surf_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.bulk, lattice_, e, 0, bdofs);
    element_dofs(space_.surf, lattice_, e, off, sdofs);
    const int nb = static_cast<int>(bdofs.size());
    const int ns = static_cast<int>(sdofs.size());
    std::vector<int> dofs(bdofs);
    dofs.insert(dofs.end(), sdofs.begin(), sdofs.end());
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nb + ns, nb + ns);
    Eigen::VectorXd C(nb + ns);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      const SurfaceFrame sf = surface_frame(f, lg.at(t));
      eval_point(basis_, time_basis_, rule.points[p], t, nullptr, false, d);
      C.head(nb) = params_.b_B * d.val;
      C.tail(ns) = -params_.b_S * d.val;
      local += (rule.weights[p] * sf.measure_factor) * C * C.transpose();
    }
    scatter(dofs, dofs, local, trips);
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat SlabAssembler::linear_matrix() const {
  SpMat A = params_.b_B * matrix_bulk();
  A += params_.b_S * matrix_surface();
  A += matrix_trace_mass();
  A += matrix_ghost();
  A += matrix_normal_stab();
  A += matrix_coupling();
  return A;
}

Eigen::VectorXd SlabAssembler::rhs_sources(const ScalarField& f_B,
                                           const ScalarField& f_S,
                                           const BoundaryFlux& outer_flux) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_dofs());
  DofEval d;
  std::vector<int> dofs;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = vol_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.bulk, lattice_, e, 0, dofs);
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      eval_point(basis_, time_basis_, rule.points[p], t, nullptr, false, d);
      const double c = params_.b_B * rule.weights[p] * f.detJ * f_B(f.x, t);
      for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
        rhs[dofs[a]] += c * d.val[a];
      }
    }
  }
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = surf_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.surf, lattice_, e, off, dofs);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      const SurfaceFrame sf = surface_frame(f, lg.at(t));
      eval_point(basis_, time_basis_, rule.points[p], t, nullptr, false, d);
      const double c =
          params_.b_S * rule.weights[p] * sf.measure_factor * f_S(f.x, t);
      for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
        rhs[dofs[a]] += c * d.val[a];
      }
    }
  }
  if (outer_flux) {
    // Natural boundary datum on the fitted outer boundary; the deformation is
    // identity there (its support never reaches the boundary layer).
    Quad1D gs = gauss_legendre((quad_.space_degree + 3) / 2);
    Quad1D gt = gauss_legendre(quad_.time_points);
    for (int e : space_.bulk.elements) {
      for (int i = 0; i < 3; ++i) {
        const int fid = mesh_.element_facets[e][i];
        if (mesh_.facets[fid].interior()) continue;
        const Eigen::Vector2d pa = mesh_.vertices[mesh_.facets[fid].vertices[0]];
        const Eigen::Vector2d pb = mesh_.vertices[mesh_.facets[fid].vertices[1]];
        const double len = (pb - pa).norm();
        Eigen::Vector2d nu(pb.y() - pa.y(), pa.x() - pb.x());
        nu.normalize();
        const Eigen::Vector2d opposite = mesh_.vertices[mesh_.elements[e][i]];
        if (nu.dot(opposite - 0.5 * (pa + pb)) > 0.0) nu = -nu;
        element_dofs(space_.bulk, lattice_, e, 0, dofs);
        for (int q = 0; q < gt.size(); ++q) {
          const double t = lin_.t_begin + gt.nodes[q] * dt();
          for (int s = 0; s < gs.size(); ++s) {
            const Eigen::Vector2d x = pa + gs.nodes[s] * (pb - pa);
            eval_point(basis_, time_basis_, mesh_.reference_coords(e, x), t,
                       nullptr, false, d);
            const double c = params_.b_B * gs.weights[s] * len *
                             gt.weights[q] * dt() * outer_flux(x, t, nu);
            for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
              rhs[dofs[a]] += c * d.val[a];
            }
          }
        }
      }
    }
  }
  return rhs;
}

namespace {

// Reference preimage of a physical point under a slab deformation: Newton on
// Theta(q) = x, started from the current slab's reference point.  The
// deformations are O(h^2) perturbations of the same affine map, so a couple
// of steps reach round-off; q may land slightly outside the reference
// triangle, where the trace polynomial extends naturally.
Eigen::Vector2d preimage_ref(const SlabDeformation& def, int e,
                             const Eigen::Vector2d& ref_guess,
                             const Eigen::Vector2d& x_target, double t) {
  Eigen::Vector2d q = ref_guess;
  for (int it = 0; it < 8; ++it) {
    const MapFrame f = def.frame(e, q, t);
    const Eigen::Vector2d r = x_target - f.x;
    if (r.squaredNorm() < 1e-28) break;
    q += f.JinvT.transpose() * r;
  }
  return q;
}

}  // namespace

Eigen::VectorXd SlabAssembler::rhs_upwind(
    const SpaceTimeSpace& old_bulk, const Eigen::VectorXd& old_bulk_trace,
    const SpaceTimeSpace& old_surf, const Eigen::VectorXd& old_surf_trace,
    const SlabDeformation* old_def) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_dofs());
  DofEval d;
  std::vector<int> dofs;
  const double t0 = lin_.t_begin;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = slice_vol_[e];
    if (rule.empty()) continue;
    if (!old_bulk.active(e)) {
      throw TransferOutOfDomain("bulk element " + std::to_string(e) +
                                " entered the domain with no previous trace");
    }
    element_dofs(space_.bulk, lattice_, e, 0, dofs);
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], t0);
      const Eigen::Vector2d q =
          old_def ? preimage_ref(*old_def, e, rule.points[p], f.x, t0)
                  : rule.points[p];
      const double uo = old_bulk.eval_trace(old_bulk_trace, e, q);
      eval_point(basis_, time_basis_, rule.points[p], t0, nullptr, false, d);
      const double c = params_.b_B * rule.weights[p] * f.detJ * uo;
      for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
        rhs[dofs[a]] += c * d.val[a];
      }
    }
  }
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = slice_if_[e];
    if (rule.empty()) continue;
    if (!old_surf.active(e)) {
      throw TransferOutOfDomain("surface element " + std::to_string(e) +
                                " entered the interface band with no previous trace");
    }
    element_dofs(space_.surf, lattice_, e, off, dofs);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], t0);
      const SurfaceFrame sf = surface_frame(f, lg.at(t0));
      const Eigen::Vector2d q =
          old_def ? preimage_ref(*old_def, e, rule.points[p], f.x, t0)
                  : rule.points[p];
      const double uo = old_surf.eval_trace(old_surf_trace, e, q);
      eval_point(basis_, time_basis_, rule.points[p], t0, nullptr, false, d);
      const double c = params_.b_S * rule.weights[p] * sf.measure_factor * uo;
      for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
        rhs[dofs[a]] += c * d.val[a];
      }
    }
  }
  return rhs;
}

Eigen::VectorXd SlabAssembler::quadratic_residual(
    const Eigen::VectorXd& state) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_dofs());
  if (params_.b_BS == 0.0) return r;
  DofEval d;
  std::vector<int> bdofs, sdofs;
  const int off = space_.surf_offset();
  for (int e : space_.surf.elements) {
    const QuadRule& rule = surf_rules_[e];
    if (rule.empty()) continue;
    element_dofs(space_.bulk, lattice_, e, 0, bdofs);
    element_dofs(space_.surf, lattice_, e, off, sdofs);
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const double t = rule.times[p];
      const MapFrame f = def_.frame(e, rule.points[p], t);
      const SurfaceFrame sf = surface_frame(f, lg.at(t));
      eval_point(basis_, time_basis_, rule.points[p], t, nullptr, false, d);
      double uB = 0.0, uS = 0.0;
      for (int a = 0; a < static_cast<int>(bdofs.size()); ++a) {
        uB += state[bdofs[a]] * d.val[a];
        uS += state[sdofs[a]] * d.val[a];
      }
      const double c =
          params_.b_BS * uB * uS * rule.weights[p] * sf.measure_factor;
      for (int a = 0; a < static_cast<int>(bdofs.size()); ++a) {
        r[sdofs[a]] += c * params_.b_S * d.val[a];
        r[bdofs[a]] -= c * params_.b_B * d.val[a];
      }
    }
  }
  return r;
}

SpMat SlabAssembler::quadratic_jacobian(const Eigen::VectorXd& state) const {
  Triplets trips;
  DofEval d;
  std::vector<int> bdofs, sdofs;
  const int off = space_.surf_offset();
  if (params_.b_BS != 0.0) {
    for (int e : space_.surf.elements) {
      const QuadRule& rule = surf_rules_[e];
      if (rule.empty()) continue;
      element_dofs(space_.bulk, lattice_, e, 0, bdofs);
      element_dofs(space_.surf, lattice_, e, off, sdofs);
      const int n = static_cast<int>(bdofs.size());
      std::vector<int> dofs(bdofs);
      dofs.insert(dofs.end(), sdofs.begin(), sdofs.end());
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(2 * n, 2 * n);
      Eigen::VectorXd row(2 * n), col(2 * n);
      LinGradCache lg{lin_, mesh_, e};
      for (int p = 0; p < rule.size(); ++p) {
        const double t = rule.times[p];
        const MapFrame f = def_.frame(e, rule.points[p], t);
        const SurfaceFrame sf = surface_frame(f, lg.at(t));
        eval_point(basis_, time_basis_, rule.points[p], t, nullptr, false, d);
        double uB = 0.0, uS = 0.0;
        for (int a = 0; a < n; ++a) {
          uB += state[bdofs[a]] * d.val[a];
          uS += state[sdofs[a]] * d.val[a];
        }
        // d/du [uB uS] applied to trial directions, tested as in the residual.
        row.head(n) = -params_.b_B * d.val;
        row.tail(n) = params_.b_S * d.val;
        col.head(n) = params_.b_BS * uS * d.val;
        col.tail(n) = params_.b_BS * uB * d.val;
        local += (rule.weights[p] * sf.measure_factor) * row * col.transpose();
      }
      scatter(dofs, dofs, local, trips);
    }
  }
  SpMat A(n_dofs(), n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

double SlabAssembler::bulk_slab_measure() const {
  double out = 0.0;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = vol_rules_[e];
    for (int p = 0; p < rule.size(); ++p) {
      out += rule.weights[p] * def_.frame(e, rule.points[p], rule.times[p]).detJ;
    }
  }
  return out;
}

double SlabAssembler::surface_slab_measure() const {
  double out = 0.0;
  for (int e : space_.surf.elements) {
    const QuadRule& rule = surf_rules_[e];
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], rule.times[p]);
      out += rule.weights[p] * surface_frame(f, lg.at(rule.times[p])).measure_factor;
    }
  }
  return out;
}

double SlabAssembler::begin_slice_area() const {
  double out = 0.0;
  for (int e : space_.bulk.elements) {
    const QuadRule& rule = slice_vol_[e];
    for (int p = 0; p < rule.size(); ++p) {
      out += rule.weights[p] * def_.frame(e, rule.points[p], lin_.t_begin).detJ;
    }
  }
  return out;
}

double SlabAssembler::begin_slice_length() const {
  double out = 0.0;
  for (int e : space_.surf.elements) {
    const QuadRule& rule = slice_if_[e];
    LinGradCache lg{lin_, mesh_, e};
    for (int p = 0; p < rule.size(); ++p) {
      const MapFrame f = def_.frame(e, rule.points[p], lin_.t_begin);
      out += rule.weights[p] * surface_frame(f, lg.at(lin_.t_begin)).measure_factor;
    }
  }
  return out;
}

}  // namespace stcutfem
