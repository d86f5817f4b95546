#include "stcutfem/mapping.hpp"

#include <cmath>

#include "stcutfem/errors.hpp"
#include "stcutfem/quadrature.hpp"

namespace stcutfem {

namespace {

Eigen::VectorXd gather_node_values(const NodeLattice& lattice,
                                   const Eigen::MatrixXd& node_values,
                                   int element, int time_index) {
  const int nl = lattice.n_local();
  Eigen::VectorXd out(nl);
  for (int l = 0; l < nl; ++l) {
    out[l] = node_values(lattice.element_nodes(element, l), time_index);
  }
  return out;
}

}  // namespace

double LevelsetHi::value(int element, const Eigen::Vector2d& ref,
                         int time_index) const {
  const TriangleBasis& basis = triangle_basis(lattice->degree);
  Eigen::VectorXd vals;
  basis.eval(ref, vals);
  return vals.dot(gather_node_values(*lattice, node_values, element, time_index));
}

Eigen::Vector2d LevelsetHi::ref_gradient(int element, const Eigen::Vector2d& ref,
                                         int time_index) const {
  const TriangleBasis& basis = triangle_basis(lattice->degree);
  Eigen::VectorXd vals;
  Eigen::MatrixXd grads;
  basis.eval_grad(ref, vals, grads);
  const Eigen::VectorXd coeffs =
      gather_node_values(*lattice, node_values, element, time_index);
  return grads.transpose() * coeffs;
}

LevelsetHi interpolate_ho_levelset(const LevelsetField& phi,
                                   const BackgroundMesh& mesh,
                                   const NodeLattice& lattice, double t_begin,
                                   double t_end, int order_t) {
  LevelsetHi hi;
  hi.lattice = &lattice;
  Quad1D lobatto = gauss_lobatto(order_t + 1);
  hi.time_nodes.resize(order_t + 1);
  for (int j = 0; j <= order_t; ++j) {
    hi.time_nodes[j] = t_begin + lobatto.nodes[j] * (t_end - t_begin);
  }
  hi.time_nodes.front() = t_begin;
  hi.time_nodes.back() = t_end;
  hi.node_values.resize(lattice.n_nodes, order_t + 1);
  for (int g = 0; g < lattice.n_nodes; ++g) {
    for (int j = 0; j <= order_t; ++j) {
      hi.node_values(g, j) = phi.value(lattice.coords[g], hi.time_nodes[j]);
    }
  }
  (void)mesh;
  return hi;
}

namespace {

// psi(alpha) = phi_hi(x + alpha * dir, t_j) - target along a fixed direction,
// evaluated with one element's polynomial extension.
struct LineFunc {
  const LevelsetHi& hi;
  const BackgroundMesh& mesh;
  int element;
  int time_index;
  Eigen::Vector2d x0, dir;
  double target;

  double value(double alpha, double* deriv = nullptr) const {
    const Eigen::Vector2d x = x0 + alpha * dir;
    const Eigen::Vector2d ref = mesh.reference_coords(element, x);
    if (deriv) {
      const ElementAffine aff = mesh.affine(element);
      const Eigen::Vector2d g =
          aff.inv_T * hi.ref_gradient(element, ref, time_index);
      *deriv = g.dot(dir);
    }
    return hi.value(element, ref, time_index) - target;
  }
};

// Safeguarded Newton inside a sign-change bracket; returns false when no
// bracket exists within [-cap, cap].
bool solve_line(const LineFunc& f, double cap, double tol, double* alpha_out) {
  const double f0 = f.value(0.0);
  if (std::abs(f0) < tol) {
    *alpha_out = 0.0;
    return true;
  }
  double lo, hi, flo, fhi;
  const double fneg = f.value(-cap), fpos = f.value(cap);
  if (fneg * f0 < 0.0) {
    lo = -cap; hi = 0.0; flo = fneg; fhi = f0;
  } else if (f0 * fpos < 0.0) {
    lo = 0.0; hi = cap; flo = f0; fhi = fpos;
  } else {
    return false;
  }
  double x = std::abs(flo) < std::abs(fhi) ? lo : hi;
  double fx = std::abs(flo) < std::abs(fhi) ? flo : fhi;
  for (int it = 0; it < 80; ++it) {
    if (std::abs(fx) < tol) {
      *alpha_out = x;
      return true;
    }
    double dfx;
    f.value(x, &dfx);
    double xn = dfx != 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    const double fn = f.value(xn);
    if (flo * fn <= 0.0) {
      hi = xn; fhi = fn;
    } else {
      lo = xn; flo = fn;
    }
    x = xn;
    fx = fn;
    if (hi - lo < 1e-16) break;
  }
  if (std::abs(fx) < tol) {
    *alpha_out = x;
    return true;
  }
  return false;
}

}  // namespace

SlabDeformation build_slab_deformation(const LevelsetHi& phi_hi,
                                       const SlabLevelsetLin& phi_lin,
                                       const ActiveSets& active,
                                       const BackgroundMesh& mesh,
                                       const NodeLattice& lattice) {
  SlabDeformation def;
  def.mesh = &mesh;
  def.lattice = &lattice;
  def.t_begin = phi_lin.t_begin;
  def.t_end = phi_lin.t_end;
  def.time_nodes = phi_hi.time_nodes;
  if (lattice.degree < 2) return def;  // linear geometry: identity

  def.identity = false;
  const int n_t = static_cast<int>(def.time_nodes.size());
  const int nl = lattice.n_local();
  const double cap = 0.5 * mesh.h;
  const double tol = 1e-13;
  def.node_disp.assign(n_t, Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(
                                lattice.n_nodes, 2));

  for (int j = 0; j < n_t; ++j) {
    const double t = def.time_nodes[j];
    Eigen::Matrix<double, Eigen::Dynamic, 2> sum =
        Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(lattice.n_nodes, 2);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(lattice.n_nodes);

    for (int e : active.surface_elements) {
      const std::array<double, 3> lv = phi_lin.element_values(mesh, e, t);
      const ElementAffine aff = mesh.affine(e);
      for (int l = 0; l < nl; ++l) {
        const int g = lattice.element_nodes(e, l);
        const Eigen::Vector2d ref = lattice.local_node_ref(l);
        // Search direction: this element's high-order gradient at the node.
        Eigen::Vector2d dir = aff.inv_T * phi_hi.ref_gradient(e, ref, j);
        const double norm = dir.norm();
        if (norm < 1e-12) {
          ++def.root_find_failures;
          continue;
        }
        dir /= norm;
        LineFunc f{phi_hi, mesh,    e,
                   j,      lattice.coords[g], dir,
                   lv[0] * (1.0 - ref.x() - ref.y()) + lv[1] * ref.x() +
                       lv[2] * ref.y()};
        double alpha = 0.0;
        if (!solve_line(f, cap, tol, &alpha)) {
          ++def.root_find_failures;
          continue;
        }
        sum.row(g) += (alpha * dir).transpose();
        count[g] += 1;
      }
    }

    for (int g = 0; g < lattice.n_nodes; ++g) {
      if (count[g] > 0 && !lattice.on_boundary[g]) {
        def.node_disp[j].row(g) = sum.row(g) / count[g];
      }
    }
  }
  return def;
}

SlabDeformation identity_deformation(const BackgroundMesh& mesh,
                                     const NodeLattice& lattice,
                                     double t_begin, double t_end, int order_t) {
  SlabDeformation def;
  def.mesh = &mesh;
  def.lattice = &lattice;
  def.t_begin = t_begin;
  def.t_end = t_end;
  Quad1D lobatto = gauss_lobatto(order_t + 1);
  def.time_nodes.resize(order_t + 1);
  for (int j = 0; j <= order_t; ++j) {
    def.time_nodes[j] = t_begin + lobatto.nodes[j] * (t_end - t_begin);
  }
  def.time_nodes.front() = t_begin;
  def.time_nodes.back() = t_end;
  return def;
}

MapFrame SlabDeformation::frame(int element, const Eigen::Vector2d& ref,
                                double t) const {
  const ElementAffine aff = mesh->affine(element);
  MapFrame f;
  f.x = aff.origin + aff.A * ref;
  f.J = aff.A;
  f.V.setZero();
  if (!identity) {
    const TriangleBasis& basis = triangle_basis(lattice->degree);
    Eigen::VectorXd vals;
    Eigen::MatrixXd grads;
    basis.eval_grad(ref, vals, grads);
    LagrangeLine line(time_nodes);
    Eigen::VectorXd lt, ltd;
    line.eval_all(t, lt);
    line.eval_all_deriv(t, ltd);
    const int nl = lattice->n_local();
    for (int j = 0; j < static_cast<int>(time_nodes.size()); ++j) {
      const auto& D = node_disp[j];
      Eigen::Vector2d d = Eigen::Vector2d::Zero();
      Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
      for (int l = 0; l < nl; ++l) {
        const int g = lattice->element_nodes(element, l);
        const Eigen::Vector2d dg = D.row(g).transpose();
        d += vals[l] * dg;
        G += dg * grads.row(l);
      }
      f.x += lt[j] * d;
      f.J += lt[j] * G;
      f.V += ltd[j] * d;
    }
  }
  f.detJ = f.J(0, 0) * f.J(1, 1) - f.J(0, 1) * f.J(1, 0);
  if (f.detJ <= 1e-12) {
    throw MappingDegenerate("deformation Jacobian determinant " +
                            std::to_string(f.detJ));
  }
  f.JinvT << f.J(1, 1), -f.J(1, 0), -f.J(0, 1), f.J(0, 0);
  f.JinvT /= f.detJ;
  return f;
}

Eigen::Vector2d SlabDeformation::node_displacement(int node, double t) const {
  if (identity) return Eigen::Vector2d::Zero();
  LagrangeLine line(time_nodes);
  Eigen::VectorXd lt;
  line.eval_all(t, lt);
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  for (int j = 0; j < static_cast<int>(time_nodes.size()); ++j) {
    d += lt[j] * node_disp[j].row(node).transpose();
  }
  return d;
}

SurfaceFrame surface_frame(const MapFrame& f, const Eigen::Vector2d& ref_grad_lin) {
  SurfaceFrame s;
  const Eigen::Vector2d n_ref = ref_grad_lin.normalized();
  const Eigen::Vector2d v = f.JinvT * n_ref;
  const double vn = v.norm();
  s.measure_factor = f.detJ * vn;
  s.normal = v / vn;
  return s;
}

}  // namespace stcutfem
