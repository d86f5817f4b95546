#include "stcutfem/spaces.hpp"

#include <algorithm>

#include "stcutfem/quadrature.hpp"

namespace stcutfem {

double SpaceTimeSpace::eval_trace(const Eigen::VectorXd& trace, int element,
                                  const Eigen::Vector2d& ref) const {
  const TriangleBasis& basis = triangle_basis(lattice->degree);
  Eigen::VectorXd vals;
  basis.eval(ref, vals);
  double out = 0.0;
  for (int l = 0; l < lattice->n_local(); ++l) {
    out += vals[l] * trace[node_rank[lattice->element_nodes(element, l)]];
  }
  return out;
}

Eigen::VectorXd SpaceTimeSpace::trace_at(const Eigen::VectorXd& coeffs,
                                         int time_index) const {
  Eigen::VectorXd trace(n_space());
  for (int r = 0; r < n_space(); ++r) {
    trace[r] = coeffs[r * n_time() + time_index];
  }
  return trace;
}

SpaceTimeSpace build_space(const BackgroundMesh& mesh, const NodeLattice& lattice,
                           const std::vector<int>& active_elements, int k_t,
                           double t_begin, double t_end) {
  SpaceTimeSpace sp;
  sp.mesh = &mesh;
  sp.lattice = &lattice;
  sp.k_t = k_t;
  sp.t_begin = t_begin;
  sp.t_end = t_end;
  if (k_t == 0) {
    sp.time_nodes = {t_end};
  } else {
    Quad1D lobatto = gauss_lobatto(k_t + 1);
    sp.time_nodes.resize(k_t + 1);
    for (int j = 0; j <= k_t; ++j) {
      sp.time_nodes[j] = t_begin + lobatto.nodes[j] * (t_end - t_begin);
    }
    sp.time_nodes.front() = t_begin;
    sp.time_nodes.back() = t_end;
  }

  sp.elements = active_elements;
  std::sort(sp.elements.begin(), sp.elements.end());
  sp.element_active.assign(mesh.n_elements(), 0);
  std::vector<char> node_used(lattice.n_nodes, 0);
  for (int e : sp.elements) {
    sp.element_active[e] = 1;
    for (int l = 0; l < lattice.n_local(); ++l) {
      node_used[lattice.element_nodes(e, l)] = 1;
    }
  }

  std::vector<int> nodes;
  for (int g = 0; g < lattice.n_nodes; ++g) {
    if (node_used[g]) nodes.push_back(g);
  }
  // Rank order fixed by coordinates, not by discovery order, so dof numbering
  // is independent of how the active set was produced.
  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    const auto& pa = lattice.coords[a];
    const auto& pb = lattice.coords[b];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    return pa.y() < pb.y();
  });
  sp.rank_node = nodes;
  sp.node_rank.assign(lattice.n_nodes, -1);
  for (int r = 0; r < static_cast<int>(nodes.size()); ++r) {
    sp.node_rank[nodes[r]] = r;
  }
  return sp;
}

CoupledSpace build_coupled_space(const ActiveSets& active,
                                 const BackgroundMesh& mesh,
                                 const NodeLattice& lattice, int k_t,
                                 double t_begin, double t_end) {
  CoupledSpace cs;
  cs.bulk = build_space(mesh, lattice, active.bulk_elements, k_t, t_begin, t_end);
  cs.surf =
      build_space(mesh, lattice, active.surface_elements, k_t, t_begin, t_end);
  return cs;
}

Eigen::VectorXd transfer_trace(const SpaceTimeSpace& old_space,
                               const Eigen::VectorXd& old_trace,
                               const SpaceTimeSpace& new_space,
                               std::vector<int>* uncovered) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(new_space.n_space());
  for (int r = 0; r < new_space.n_space(); ++r) {
    const int g = new_space.rank_node[r];
    const int old_rank = old_space.node_rank[g];
    if (old_rank >= 0) {
      out[r] = old_trace[old_rank];
    } else if (uncovered) {
      uncovered->push_back(g);
    }
  }
  return out;
}

}  // namespace stcutfem
