#include "stcutfem/mesh.hpp"

#include <cmath>
#include <map>
#include <ostream>

namespace stcutfem {

double BackgroundMesh::element_area(int e) const {
  const auto& el = elements[e];
  const Eigen::Vector2d a = vertices[el[0]], b = vertices[el[1]],
                        c = vertices[el[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (b.y() - a.y()) * (c.x() - a.x()));
}

ElementAffine BackgroundMesh::affine(int e) const {
  const auto& el = elements[e];
  ElementAffine aff;
  aff.origin = vertices[el[0]];
  aff.A.col(0) = vertices[el[1]] - aff.origin;
  aff.A.col(1) = vertices[el[2]] - aff.origin;
  aff.det = aff.A(0, 0) * aff.A(1, 1) - aff.A(0, 1) * aff.A(1, 0);
  Eigen::Matrix2d inv;
  inv << aff.A(1, 1), -aff.A(1, 0), -aff.A(0, 1), aff.A(0, 0);
  aff.inv_T = inv / aff.det;
  return aff;
}

Eigen::Vector2d BackgroundMesh::reference_coords(int e,
                                                 const Eigen::Vector2d& x) const {
  const ElementAffine aff = affine(e);
  return aff.inv_T.transpose() * (x - aff.origin);
}

bool BackgroundMesh::vertex_on_boundary(int v) const {
  const Eigen::Vector2d& p = vertices[v];
  const double tol = 1e-12;
  return p.x() < tol || p.x() > 1.0 - tol || p.y() < tol || p.y() > 1.0 - tol;
}

void BackgroundMesh::dump(std::ostream& os) const {
  for (int v = 0; v < n_vertices(); ++v) {
    os << "v " << vertices[v].x() << " " << vertices[v].y() << "\n";
  }
  for (const auto& el : elements) {
    os << "e " << el[0] << " " << el[1] << " " << el[2] << "\n";
  }
}

BackgroundMesh build_structured_mesh(double h_target) {
  BackgroundMesh mesh;
  int n = static_cast<int>(std::ceil(1.0 / h_target));
  if (n < 1) n = 1;
  mesh.grid_n = n;

  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      mesh.vertices.emplace_back(static_cast<double>(ix) / n,
                                 static_cast<double>(iy) / n);
    }
  }
  auto vid = [n](int ix, int iy) { return iy * (n + 1) + ix; };

  mesh.elements.reserve(2 * n * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int a = vid(ix, iy), b = vid(ix + 1, iy), c = vid(ix + 1, iy + 1),
                d = vid(ix, iy + 1);
      mesh.elements.push_back({a, b, c});  // split along the a-c diagonal
      mesh.elements.push_back({a, c, d});
    }
  }

  // Facet i of an element sits opposite vertex i.  Pairs are stored sorted so
  // both neighbors describe a shared facet identically.
  std::map<std::pair<int, int>, int> facet_of;
  mesh.element_facets.assign(mesh.elements.size(), {-1, -1, -1});
  mesh.neighbors.assign(mesh.elements.size(), {-1, -1, -1});
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int i = 0; i < 3; ++i) {
      const int va = mesh.elements[e][(i + 1) % 3];
      const int vb = mesh.elements[e][(i + 2) % 3];
      const std::pair<int, int> key{std::min(va, vb), std::max(va, vb)};
      auto it = facet_of.find(key);
      if (it == facet_of.end()) {
        Facet f;
        f.vertices = {key.first, key.second};
        f.elements = {e, -1};
        facet_of.emplace(key, mesh.n_facets());
        mesh.element_facets[e][i] = mesh.n_facets();
        mesh.facets.push_back(f);
      } else {
        Facet& f = mesh.facets[it->second];
        f.elements[1] = e;
        mesh.element_facets[e][i] = it->second;
      }
    }
  }
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int i = 0; i < 3; ++i) {
      const Facet& f = mesh.facets[mesh.element_facets[e][i]];
      mesh.neighbors[e][i] = f.elements[0] == e ? f.elements[1] : f.elements[0];
    }
  }

  double h = 0.0;
  for (const Facet& f : mesh.facets) {
    h = std::max(h, (mesh.vertices[f.vertices[0]] - mesh.vertices[f.vertices[1]])
                        .norm());
  }
  mesh.h = h;
  return mesh;
}

std::vector<FacetPatch> build_facet_patches(const BackgroundMesh& mesh) {
  std::vector<FacetPatch> patches;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    if (!mesh.facets[f].interior()) continue;
    FacetPatch p;
    p.facet = f;
    p.elements = mesh.facets[f].elements;
    patches.push_back(p);
  }
  return patches;
}

TimePartition make_time_partition(double t_final, int n_slabs) {
  TimePartition part;
  part.t_final = t_final;
  part.n_slabs = n_slabs;
  part.dt = t_final / n_slabs;
  part.nodes.resize(n_slabs + 1);
  for (int n = 0; n <= n_slabs; ++n) part.nodes[n] = n * part.dt;
  part.nodes[n_slabs] = t_final;
  return part;
}

}  // namespace stcutfem
