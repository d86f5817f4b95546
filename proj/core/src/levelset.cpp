#include "stcutfem/levelset.hpp"

#include <algorithm>
#include <deque>

#include "stcutfem/errors.hpp"
#include "stcutfem/lagrange.hpp"
#include "stcutfem/quadrature.hpp"

namespace stcutfem {

Eigen::VectorXd SlabLevelsetLin::time_weights(double t) const {
  LagrangeLine line(time_nodes);
  Eigen::VectorXd w;
  line.eval_all(t, w);
  return w;
}

double SlabLevelsetLin::vertex_value(int v, double t) const {
  return vertex_values.row(v).dot(time_weights(t));
}

std::array<double, 3> SlabLevelsetLin::element_values(const BackgroundMesh& mesh,
                                                      int element,
                                                      double t) const {
  const Eigen::VectorXd w = time_weights(t);
  const auto& el = mesh.elements[element];
  return {vertex_values.row(el[0]).dot(w), vertex_values.row(el[1]).dot(w),
          vertex_values.row(el[2]).dot(w)};
}

SlabLevelsetLin interpolate_slab_levelset(const LevelsetField& phi,
                                          const BackgroundMesh& mesh,
                                          double t_begin, double t_end,
                                          int order) {
  SlabLevelsetLin lin;
  lin.t_begin = t_begin;
  lin.t_end = t_end;
  lin.order = order;
  Quad1D lobatto = gauss_lobatto(order + 1);
  lin.time_nodes.resize(order + 1);
  for (int j = 0; j <= order; ++j) {
    lin.time_nodes[j] = t_begin + lobatto.nodes[j] * (t_end - t_begin);
  }
  lin.time_nodes.front() = t_begin;  // keep slab endpoints exact
  lin.time_nodes.back() = t_end;
  lin.vertex_values.resize(mesh.n_vertices(), order + 1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    for (int j = 0; j <= order; ++j) {
      lin.vertex_values(v, j) = phi.value(mesh.vertices[v], lin.time_nodes[j]);
    }
  }
  return lin;
}

ActiveSets classify_slab(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                         int n_samples, double strip_width) {
  ActiveSets sets;
  sets.sample_times.resize(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    sets.sample_times[s] =
        phi.t_begin + (phi.t_end - phi.t_begin) * s / (n_samples - 1);
  }
  sets.sample_times.front() = phi.t_begin;
  sets.sample_times.back() = phi.t_end;

  // Vertex values at every sample time, one matvec per sample.
  Eigen::MatrixXd vals(mesh.n_vertices(), n_samples);
  for (int s = 0; s < n_samples; ++s) {
    vals.col(s) = phi.vertex_values * phi.time_weights(sets.sample_times[s]);
  }

  const int ne = mesh.n_elements();
  sets.marks.assign(ne, std::vector<SignMark>(n_samples, SignMark::Pos));
  sets.fully_interior.assign(ne, 0);
  std::vector<char> core(ne, 0), candidate(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const auto& el = mesh.elements[e];
    double overall_min = 1e300;
    bool all_neg = true;
    for (int s = 0; s < n_samples; ++s) {
      const double a = vals(el[0], s), b = vals(el[1], s), c = vals(el[2], s);
      const double vmin = std::min({a, b, c}), vmax = std::max({a, b, c});
      overall_min = std::min(overall_min, vmin);
      SignMark m = SignMark::Pos;
      if (vmin < 0.0) m = vmax > 0.0 ? SignMark::Cut : SignMark::Neg;
      sets.marks[e][s] = m;
      if (m != SignMark::Neg) all_neg = false;
    }
    sets.fully_interior[e] = all_neg ? 1 : 0;
    core[e] = overall_min < 0.0 ? 1 : 0;
    candidate[e] = overall_min < strip_width ? 1 : 0;
  }

  // The activation strip keeps only elements reachable from the genuine bulk
  // through candidate facets; floating strip islands would carry dofs no
  // integral ever touches.
  std::vector<char> in_bulk(ne, 0);
  std::deque<int> queue;
  for (int e = 0; e < ne; ++e) {
    if (core[e]) {
      in_bulk[e] = 1;
      queue.push_back(e);
    }
  }
  while (!queue.empty()) {
    const int e = queue.front();
    queue.pop_front();
    for (int nb : mesh.neighbors[e]) {
      if (nb >= 0 && candidate[nb] && !in_bulk[nb]) {
        in_bulk[nb] = 1;
        queue.push_back(nb);
      }
    }
  }

  sets.in_bulk = in_bulk;
  sets.in_surface.assign(ne, 0);
  for (int e = 0; e < ne; ++e) {
    if (candidate[e] && !in_bulk[e]) ++sets.strip_dropped;
    if (in_bulk[e]) sets.bulk_elements.push_back(e);
    const bool cut_somewhere =
        std::any_of(sets.marks[e].begin(), sets.marks[e].end(),
                    [](SignMark m) { return m == SignMark::Cut; });
    if (cut_somewhere) {
      sets.in_surface[e] = 1;
      sets.surface_elements.push_back(e);
    }
  }
  if (sets.bulk_elements.empty()) {
    throw EmptyActiveSet("no element intersects the bulk region in this slab");
  }
  return sets;
}

std::vector<int> build_facet_set(const ActiveSets& active,
                                 const BackgroundMesh& mesh) {
  std::vector<int> facets;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (!facet.interior()) continue;
    const int a = facet.elements[0], b = facet.elements[1];
    if (!active.in_bulk[a] || !active.in_bulk[b]) continue;
    // Fully interior pairs never see a bad cut; everything else (cut at some
    // sample, swept through, or strip-activated) gets stabilized.
    if (active.fully_interior[a] && active.fully_interior[b]) continue;
    facets.push_back(f);
  }
  return facets;
}

}  // namespace stcutfem
