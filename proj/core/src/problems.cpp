#include "stcutfem/problems.hpp"

#include <cmath>

namespace stcutfem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadius = 0.18;
constexpr double kOrbit = 0.28;
constexpr double kAmp = 0.4;

Eigen::Vector2d hole_center(double t) {
  return {0.5 + kOrbit * std::sin(kPi * t), 0.5 + kOrbit * std::cos(kPi * t)};
}

Eigen::Vector2d hole_center_dot(double t) {
  return {kOrbit * kPi * std::cos(kPi * t), -kOrbit * kPi * std::sin(kPi * t)};
}

/// All partial derivatives of the bulk solution used by the source terms.
struct BulkDerivs {
  double u, ut;
  Eigen::Vector2d g;       // spatial gradient
  Eigen::Vector2d gt;      // d/dt of the gradient
  Eigen::Matrix2d H;       // Hessian
  double uxxx, uxxy, uxyy, uyyy;

  /// Symmetric third-derivative tensor applied to three vectors.
  double third(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
               const Eigen::Vector2d& c) const {
    return uxxx * a.x() * b.x() * c.x() +
           uxxy * (a.x() * b.x() * c.y() + a.x() * b.y() * c.x() +
                   a.y() * b.x() * c.x()) +
           uxyy * (a.x() * b.y() * c.y() + a.y() * b.x() * c.y() +
                   a.y() * b.y() * c.x()) +
           uyyy * a.y() * b.y() * c.y();
  }
};

BulkDerivs bulk_derivs(const Eigen::Vector2d& x, double t) {
  const double cx = std::cos(kPi * x.x()), sx = std::sin(kPi * x.x());
  const double cy = std::cos(kPi * x.y()), sy = std::sin(kPi * x.y());
  const double ct = std::cos(2.0 * kPi * t), st = std::sin(2.0 * kPi * t);
  const double a = kAmp, p = kPi;
  BulkDerivs d;
  d.u = 0.5 + a * cx * sy * ct;
  d.ut = -2.0 * a * p * cx * sy * st;
  d.g = {-a * p * sx * sy * ct, a * p * cx * cy * ct};
  d.gt = {2.0 * a * p * p * sx * sy * st, -2.0 * a * p * p * cx * cy * st};
  const double uxx = -a * p * p * cx * sy * ct;
  const double uxy = -a * p * p * sx * cy * ct;
  d.H << uxx, uxy, uxy, uxx;  // uyy = uxx for this separable product
  d.uxxx = a * p * p * p * sx * sy * ct;
  d.uxxy = -a * p * p * p * cx * cy * ct;
  d.uxyy = a * p * p * p * sx * sy * ct;
  d.uyyy = -a * p * p * p * cx * cy * ct;
  return d;
}

/// Everything the surface fields need at one point near the interface.
struct SurfaceState {
  double r;
  Eigen::Vector2d e, tau;  // radial and tangential unit vectors
  Eigen::Matrix2d P;       // I - e e^T
  BulkDerivs b;
  double fc;               // exchange flux -k_B grad u_B . n, n = grad phi/|grad phi| = -e
  double N, D;             // u_S = N / D
};

SurfaceState surface_state(const Eigen::Vector2d& x, double t,
                           const ModelParams& prm) {
  SurfaceState s;
  const Eigen::Vector2d dx = x - hole_center(t);
  s.r = dx.norm();
  s.e = dx / s.r;
  s.tau = {-s.e.y(), s.e.x()};
  s.P = Eigen::Matrix2d::Identity() - s.e * s.e.transpose();
  s.b = bulk_derivs(x, t);
  s.fc = prm.k_B * s.b.g.dot(s.e);
  s.N = prm.b_B * s.b.u - s.fc;
  s.D = prm.b_S + prm.b_BS * s.b.u;
  return s;
}

}  // namespace

ManufacturedProblem build_manufactured_case(Model model) {
  ManufacturedProblem prob;
  prob.model = model;
  prob.t_final = 0.5;
  prob.params.k_B = 0.01;
  prob.params.k_S = 1.0;
  prob.params.b_B = 1.0;
  prob.params.b_S = 1.0;
  prob.params.b_BS = model == Model::Langmuir ? 1.0 : 0.0;
  prob.params.gamma_B = 0.05;
  // Coefficient for the 1/h-weighted normal-gradient stabilization. The
  // motion of the interface is not material for w here, and the resulting
  // transport across the surface needs a stabilization weight ~ 1/h; 0.5
  // balances that control against the stabilization's consistency error.
  prob.params.gamma_S = 0.5;
  const ModelParams prm = prob.params;

  prob.phi.value = [](const Eigen::Vector2d& x, double t) {
    return kRadius - (x - hole_center(t)).norm();
  };
  prob.grad_phi = [](const Eigen::Vector2d& x, double t) -> Eigen::Vector2d {
    const Eigen::Vector2d dx = x - hole_center(t);
    return -dx / dx.norm();
  };
  prob.dphi_dt = [](const Eigen::Vector2d& x, double t) {
    const Eigen::Vector2d dx = x - hole_center(t);
    return dx.dot(hole_center_dot(t)) / dx.norm();
  };

  prob.w.value = [](const Eigen::Vector2d& x, double) -> Eigen::Vector2d {
    return {kPi * (0.5 - x.y()), kPi * (x.x() - 0.5)};
  };
  prob.w.jacobian = [](const Eigen::Vector2d&, double) -> Eigen::Matrix2d {
    Eigen::Matrix2d j;
    j << 0.0, -kPi, kPi, 0.0;
    return j;
  };
  prob.w_inf = kPi * std::sqrt(0.5);

  prob.u_B_exact = [](const Eigen::Vector2d& x, double t) {
    return bulk_derivs(x, t).u;
  };
  prob.u_S_exact = [prm](const Eigen::Vector2d& x, double t) {
    const SurfaceState s = surface_state(x, t, prm);
    return s.N / s.D;
  };
  prob.u_B_initial = prob.u_B_exact;
  prob.u_S_initial = prob.u_S_exact;

  prob.f_B = [prm](const Eigen::Vector2d& x, double t) {
    const BulkDerivs d = bulk_derivs(x, t);
    const Eigen::Vector2d w{kPi * (0.5 - x.y()), kPi * (x.x() - 0.5)};
    return d.ut + w.dot(d.g) - prm.k_B * d.H.trace();
  };

  prob.f_exchange = [prm](const Eigen::Vector2d& x, double t) {
    return surface_state(x, t, prm).fc;
  };

  prob.f_S = [prm](const Eigen::Vector2d& x, double t) {
    const SurfaceState s = surface_state(x, t, prm);
    const BulkDerivs& d = s.b;
    const Eigen::Vector2d cdot = hole_center_dot(t);

    // Time and space derivatives of the extended fields.
    const Eigen::Vector2d grad_fc =
        prm.k_B * (d.H * s.e + s.P * d.g / s.r);
    const double fc_t =
        prm.k_B * (d.gt.dot(s.e) - d.g.dot(s.P * cdot) / s.r);
    const Eigen::Vector2d gradN = prm.b_B * d.g - grad_fc;
    const double Nt = prm.b_B * d.ut - fc_t;
    const Eigen::Vector2d gradD = prm.b_BS * d.g;
    const double Dt = prm.b_BS * d.ut;
    const Eigen::Vector2d grad_uS = (s.D * gradN - s.N * gradD) / (s.D * s.D);
    const double uS_t = (s.D * Nt - s.N * Dt) / (s.D * s.D);

    // Laplace-Beltrami along the level circle through x.
    const double uBp = s.r * d.g.dot(s.tau);
    const double uBpp =
        s.r * s.r * s.tau.dot(d.H * s.tau) - s.r * d.g.dot(s.e);
    const double Fp = prm.k_B * (s.r * s.tau.dot(d.H * s.e) + d.g.dot(s.tau));
    const double Fpp =
        prm.k_B * (s.r * s.r * d.third(s.tau, s.tau, s.e) +
                   2.0 * s.r * s.tau.dot(d.H * s.tau) -
                   s.r * s.e.dot(d.H * s.e) - d.g.dot(s.e));
    const double Np = prm.b_B * uBp - Fp;
    const double Npp = prm.b_B * uBpp - Fpp;
    const double Dp = prm.b_BS * uBp;
    const double Dpp = prm.b_BS * uBpp;
    const double hpp = (Npp * s.D * s.D - s.N * Dpp * s.D -
                        2.0 * Np * Dp * s.D + 2.0 * s.N * Dp * Dp) /
                       (s.D * s.D * s.D);
    const double lap_g = hpp / (s.r * s.r);

    const Eigen::Vector2d w{kPi * (0.5 - x.y()), kPi * (x.x() - 0.5)};
    Eigen::Matrix2d gw;
    gw << 0.0, -kPi, kPi, 0.0;
    const double div_g = (s.P * gw).trace();

    // The strong form's convective derivative acts on the normal extension
    // of u_S. The closed form is not normally extended, and the two fields
    // agree only on the surface itself; the surviving difference of their
    // derivatives there is the normal transport of the gap. It vanishes
    // identically when the surface moves with w (cdot - w is tangential).
    const double ext_corr = (cdot - w).dot(s.e) * grad_uS.dot(s.e);

    return uS_t + w.dot(grad_uS) + ext_corr + div_g * (s.N / s.D) -
           prm.k_S * lap_g - s.fc;
  };

  prob.outer_flux = [prm](const Eigen::Vector2d& x, double t,
                          const Eigen::Vector2d& nu) {
    return prm.k_B * bulk_derivs(x, t).g.dot(nu);
  };
  return prob;
}

ManufacturedProblem build_constant_case(double c) {
  ManufacturedProblem prob = build_manufactured_case(Model::Henry);
  prob.params.b_BS = 0.0;
  auto constant = [c](const Eigen::Vector2d&, double) { return c; };
  auto zero = [](const Eigen::Vector2d&, double) { return 0.0; };
  prob.u_B_exact = constant;
  prob.u_S_exact = constant;
  prob.u_B_initial = constant;
  prob.u_S_initial = constant;
  prob.f_B = zero;
  prob.f_S = zero;
  prob.f_exchange = zero;
  prob.outer_flux = nullptr;
  return prob;
}

}  // namespace stcutfem
