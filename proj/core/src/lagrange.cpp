#include "stcutfem/lagrange.hpp"

#include <map>

namespace stcutfem {

namespace {

// Monomial exponents in the same (j outer, i inner) order as the nodes.
std::vector<std::array<int, 2>> monomial_powers(int degree) {
  std::vector<std::array<int, 2>> powers;
  for (int j = 0; j <= degree; ++j) {
    for (int i = 0; i + j <= degree; ++i) powers.push_back({i, j});
  }
  return powers;
}

TriangleBasis build_triangle_basis(int degree) {
  TriangleBasis basis;
  basis.degree = degree;
  basis.n_funcs = (degree + 1) * (degree + 2) / 2;
  basis.powers = monomial_powers(degree);
  for (int j = 0; j <= degree; ++j) {
    for (int i = 0; i + j <= degree; ++i) {
      basis.nodes.emplace_back(static_cast<double>(i) / degree,
                               static_cast<double>(j) / degree);
    }
  }
  Eigen::MatrixXd V(basis.n_funcs, basis.n_funcs);
  for (int l = 0; l < basis.n_funcs; ++l) {
    for (int m = 0; m < basis.n_funcs; ++m) {
      V(l, m) = std::pow(basis.nodes[l].x(), basis.powers[m][0]) *
                std::pow(basis.nodes[l].y(), basis.powers[m][1]);
    }
  }
  basis.coeff = V.fullPivLu()
                    .solve(Eigen::MatrixXd::Identity(basis.n_funcs, basis.n_funcs))
                    .transpose();
  return basis;
}

}  // namespace

void TriangleBasis::eval(const Eigen::Vector2d& xi, Eigen::VectorXd& values) const {
  Eigen::VectorXd mono(n_funcs);
  for (int m = 0; m < n_funcs; ++m) {
    mono[m] = std::pow(xi.x(), powers[m][0]) * std::pow(xi.y(), powers[m][1]);
  }
  values = coeff * mono;
}

void TriangleBasis::eval_grad(const Eigen::Vector2d& xi, Eigen::VectorXd& values,
                              Eigen::MatrixXd& grads) const {
  Eigen::VectorXd mono(n_funcs);
  Eigen::MatrixXd dmono(n_funcs, 2);
  for (int m = 0; m < n_funcs; ++m) {
    const int px = powers[m][0], py = powers[m][1];
    const double xp = std::pow(xi.x(), px), yp = std::pow(xi.y(), py);
    mono[m] = xp * yp;
    dmono(m, 0) = px == 0 ? 0.0 : px * std::pow(xi.x(), px - 1) * yp;
    dmono(m, 1) = py == 0 ? 0.0 : py * xp * std::pow(xi.y(), py - 1);
  }
  values = coeff * mono;
  grads = coeff * dmono;
}

const TriangleBasis& triangle_basis(int degree) {
  static std::map<int, TriangleBasis> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_triangle_basis(degree)).first;
  return it->second;
}

double LagrangeLine::value(int i, double t) const {
  double v = 1.0;
  for (int j = 0; j < size(); ++j) {
    if (j != i) v *= (t - nodes[j]) / (nodes[i] - nodes[j]);
  }
  return v;
}

double LagrangeLine::deriv(int i, double t) const {
  double d = 0.0;
  for (int m = 0; m < size(); ++m) {
    if (m == i) continue;
    double term = 1.0 / (nodes[i] - nodes[m]);
    for (int j = 0; j < size(); ++j) {
      if (j != i && j != m) term *= (t - nodes[j]) / (nodes[i] - nodes[j]);
    }
    d += term;
  }
  return d;
}

void LagrangeLine::eval_all(double t, Eigen::VectorXd& values) const {
  values.resize(size());
  for (int i = 0; i < size(); ++i) values[i] = value(i, t);
}

void LagrangeLine::eval_all_deriv(double t, Eigen::VectorXd& derivs) const {
  derivs.resize(size());
  for (int i = 0; i < size(); ++i) derivs[i] = deriv(i, t);
}

Eigen::Vector2d NodeLattice::local_node_ref(int l) const {
  int j = 0, rest = l;
  while (rest >= degree + 1 - j) {
    rest -= degree + 1 - j;
    ++j;
  }
  return {static_cast<double>(rest) / degree, static_cast<double>(j) / degree};
}

NodeLattice build_node_lattice(const BackgroundMesh& mesh, int degree) {
  NodeLattice lat;
  lat.degree = degree;
  lat.mesh = &mesh;
  const int k = degree;
  const int n_local = lat.n_local();

  // Global ids: mesh vertices first, then k-1 nodes per facet (walking from
  // the smaller vertex id), then element-interior nodes.
  const int edge_base = mesh.n_vertices();
  const int per_edge = k - 1;
  const int interior_base = edge_base + per_edge * mesh.n_facets();
  const int per_interior = (k - 1) * (k - 2) / 2;
  lat.n_nodes = interior_base + per_interior * mesh.n_elements();

  lat.coords.resize(lat.n_nodes);
  lat.on_boundary.assign(lat.n_nodes, 0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    lat.coords[v] = mesh.vertices[v];
    lat.on_boundary[v] = mesh.vertex_on_boundary(v) ? 1 : 0;
  }
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Eigen::Vector2d a = mesh.vertices[mesh.facets[f].vertices[0]];
    const Eigen::Vector2d b = mesh.vertices[mesh.facets[f].vertices[1]];
    for (int m = 1; m < k; ++m) {
      const int g = edge_base + f * per_edge + (m - 1);
      lat.coords[g] = a + (static_cast<double>(m) / k) * (b - a);
      lat.on_boundary[g] = mesh.facets[f].interior() ? 0 : 1;
    }
  }

  lat.element_nodes.resize(mesh.n_elements(), n_local);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const ElementAffine aff = mesh.affine(e);
    int interior_count = 0;
    int l = 0;
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i + j <= k; ++i, ++l) {
        int g = -1;
        if (i == 0 && j == 0) {
          g = el[0];
        } else if (i == k && j == 0) {
          g = el[1];
        } else if (i == 0 && j == k) {
          g = el[2];
        } else if (j == 0) {  // edge v0-v1, opposite vertex 2
          const int f = mesh.element_facets[e][2];
          const int m = mesh.facets[f].vertices[0] == el[0] ? i : k - i;
          g = edge_base + f * per_edge + (m - 1);
        } else if (i == 0) {  // edge v0-v2, opposite vertex 1
          const int f = mesh.element_facets[e][1];
          const int m = mesh.facets[f].vertices[0] == el[0] ? j : k - j;
          g = edge_base + f * per_edge + (m - 1);
        } else if (i + j == k) {  // edge v1-v2, opposite vertex 0
          const int f = mesh.element_facets[e][0];
          const int m = mesh.facets[f].vertices[0] == el[1] ? j : k - j;
          g = edge_base + f * per_edge + (m - 1);
        } else {
          g = interior_base + e * per_interior + interior_count++;
          lat.coords[g] =
              aff.origin + aff.A * Eigen::Vector2d(static_cast<double>(i) / k,
                                                   static_cast<double>(j) / k);
        }
        lat.element_nodes(e, l) = g;
      }
    }
  }

  lat.node_elements.resize(lat.n_nodes);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int l = 0; l < n_local; ++l) {
      lat.node_elements[lat.element_nodes(e, l)].push_back(e);
    }
  }
  return lat;
}

}  // namespace stcutfem
