#include "stcutfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stcutfem/errors.hpp"
#include "stcutfem/levelset.hpp"
#include "stcutfem/mesh.hpp"

namespace stcutfem {

namespace {

// P_n and P_n' on [-1,1] via the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  double pm = 1.0, pc = x;
  for (int k = 2; k <= n; ++k) {
    double pn = ((2.0 * k - 1.0) * x * pc - (k - 1.0) * pm) / k;
    pm = pc;
    pc = pn;
  }
  p = pc;
  // (1-x^2) P_n' = n (P_{n-1} - x P_n); endpoints never queried here.
  dp = n * (pm - x * pc) / (1.0 - x * x);
}

}  // namespace

Quad1D gauss_legendre(int n) {
  Quad1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Root of P_n from the classic cosine guess, polished by Newton.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    if (n == 1) x = 0.0;
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    legendre(n, x, p, dp);
    q.nodes[i] = 0.5 * (x + 1.0);
    q.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)dp^2) / 2
  }
  std::reverse(q.nodes.begin(), q.nodes.end());  // ascending
  std::reverse(q.weights.begin(), q.weights.end());
  return q;
}

Quad1D gauss_lobatto(int n) {
  Quad1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int m = n - 1;
  const double wend = 2.0 / (n * m);
  q.nodes[0] = 0.0;
  q.nodes[n - 1] = 1.0;
  q.weights[0] = q.weights[n - 1] = 0.5 * wend;
  for (int i = 1; i < m; ++i) {
    // Interior nodes are the roots of P_{n-1}'.
    double x = std::cos(M_PI * i / m);
    for (int it = 0; it < 100; ++it) {
      double p = 0.0, dp = 0.0;
      legendre(m, x, p, dp);
      double ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      double step = dp / ddp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    double p = 0.0, dp = 0.0;
    legendre(m, x, p, dp);
    q.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    q.weights[n - 1 - i] = 1.0 / (n * m * p * p);  // halved for [0,1]
  }
  return q;
}

double QuadRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

QuadRule triangle_rule(int degree, QuadRule::Tag tag) {
  // Conical product: x = u, y = v (1-u), Jacobian (1-u).  The extra factor
  // raises the u-degree by one, hence the +2.
  const int n = (degree + 3) / 2;
  Quad1D g = gauss_legendre(n);
  QuadRule rule;
  rule.tag = tag;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double u = g.nodes[i];
    for (int j = 0; j < n; ++j) {
      const double v = g.nodes[j];
      rule.points.emplace_back(u, v * (1.0 - u));
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

std::array<double, 3> perturb_degenerate(const std::array<double, 3>& phi) {
  std::array<double, 3> out = phi;
  for (double& v : out) {
    if (std::abs(v) < kDegeneracyBand) v = kDegeneracyBand;
  }
  return out;
}

namespace {

const QuadRule& cached_triangle_rule(int degree) {
  static std::map<int, QuadRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, triangle_rule(degree)).first;
  return it->second;
}

bool volume_like(QuadRule::Tag tag) {
  return tag != QuadRule::Tag::Interface && tag != QuadRule::Tag::SliceIf;
}

// Sub-triangle of the reference triangle: map the cached full rule.
void append_subtriangle(QuadRule& rule, const QuadRule& base,
                        const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                        const Eigen::Vector2d& p2) {
  const Eigen::Vector2d e1 = p1 - p0, e2 = p2 - p0;
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  const double scale = std::abs(det);  // reference measure 1/2 * 2 = area
  if (scale < 1e-300) return;
  for (int q = 0; q < base.size(); ++q) {
    rule.points.push_back(p0 + base.points[q].x() * e1 + base.points[q].y() * e2);
    rule.weights.push_back(base.weights[q] * scale);
  }
}

}  // namespace

QuadRule cut_triangle_rule(const std::array<double, 3>& vertex_phi,
                           QuadRule::Tag tag, int degree) {
  if (std::abs(vertex_phi[0]) < kDegeneracyBand &&
      std::abs(vertex_phi[1]) < kDegeneracyBand &&
      std::abs(vertex_phi[2]) < kDegeneracyBand) {
    throw DegenerateCut("all three vertex level-set values are near zero");
  }
  const std::array<double, 3> phi = perturb_degenerate(vertex_phi);
  const int neg =
      (phi[0] < 0.0 ? 1 : 0) + (phi[1] < 0.0 ? 1 : 0) + (phi[2] < 0.0 ? 1 : 0);

  QuadRule rule;
  rule.tag = tag;
  if (neg == 0) return rule;
  if (neg == 3) {
    if (volume_like(tag)) {
      rule = cached_triangle_rule(degree);
      rule.tag = tag;
    }
    return rule;
  }

  // Mixed signs: walk the boundary, collecting negative vertices and the two
  // edge crossings, which yields the {phi<0} sub-polygon in CCW order.
  static const Eigen::Vector2d ref[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<Eigen::Vector2d> poly;
  std::vector<Eigen::Vector2d> chord;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (phi[i] < 0.0) poly.push_back(ref[i]);
    if ((phi[i] < 0.0) != (phi[j] < 0.0)) {
      const double s = phi[i] / (phi[i] - phi[j]);
      const Eigen::Vector2d cut = ref[i] + s * (ref[j] - ref[i]);
      poly.push_back(cut);
      chord.push_back(cut);
    }
  }

  if (!volume_like(tag)) {
    const Eigen::Vector2d a = chord[0], b = chord[1];
    const double len = (b - a).norm();
    Quad1D g = gauss_legendre((degree + 2) / 2 > 0 ? (degree + 2) / 2 : 1);
    for (int q = 0; q < g.size(); ++q) {
      rule.points.push_back(a + g.nodes[q] * (b - a));
      rule.weights.push_back(g.weights[q] * len);
    }
    return rule;
  }

  const QuadRule& base = cached_triangle_rule(degree);
  for (size_t k = 1; k + 1 < poly.size(); ++k) {
    append_subtriangle(rule, base, poly[0], poly[k], poly[k + 1]);
  }
  return rule;
}

QuadRule slab_volume_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                          int element, int degree, int n_time) {
  const double t0 = phi.t_begin, dt = phi.t_end - phi.t_begin;
  Quad1D g = gauss_legendre(n_time);
  QuadRule rule;
  rule.tag = QuadRule::Tag::VolNeg;
  for (int q = 0; q < g.size(); ++q) {
    const double t = t0 + g.nodes[q] * dt;
    const double tw = g.weights[q] * dt;
    QuadRule cut = cut_triangle_rule(phi.element_values(mesh, element, t),
                                     QuadRule::Tag::VolNeg, degree);
    for (int p = 0; p < cut.size(); ++p) {
      rule.points.push_back(cut.points[p]);
      rule.weights.push_back(cut.weights[p] * tw);
      rule.times.push_back(t);
    }
  }
  return rule;
}

QuadRule slab_surface_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                           int element, int degree, int n_time) {
  const double t0 = phi.t_begin, dt = phi.t_end - phi.t_begin;
  Quad1D g = gauss_legendre(n_time);
  QuadRule rule;
  rule.tag = QuadRule::Tag::Interface;
  for (int q = 0; q < g.size(); ++q) {
    const double t = t0 + g.nodes[q] * dt;
    const double tw = g.weights[q] * dt;
    QuadRule cut = cut_triangle_rule(phi.element_values(mesh, element, t),
                                     QuadRule::Tag::Interface, degree);
    for (int p = 0; p < cut.size(); ++p) {
      rule.points.push_back(cut.points[p]);
      rule.weights.push_back(cut.weights[p] * tw);
      rule.times.push_back(t);
    }
  }
  return rule;
}

QuadRule slice_rule(const SlabLevelsetLin& phi, const BackgroundMesh& mesh,
                    int element, double t_star, QuadRule::Tag tag, int degree) {
  QuadRule rule = cut_triangle_rule(phi.element_values(mesh, element, t_star),
                                    tag, degree);
  rule.times.assign(rule.points.size(), t_star);
  return rule;
}

}  // namespace stcutfem
