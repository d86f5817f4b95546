#pragma once

#include <functional>

#include "stcutfem/assembly.hpp"
#include "stcutfem/levelset.hpp"

namespace stcutfem {

enum class Model { Henry, Langmuir };

/// A manufactured test case: moving geometry, exact solution pair, and the
/// sources that make the pair solve the coupled system.  The surface fields
/// are defined on a neighborhood of the interface (constant extension along
/// level circles), so they can be sampled at the approximate geometry.
struct ManufacturedProblem {
  Model model = Model::Henry;
  ModelParams params;
  double t_final = 0.5;

  LevelsetField phi;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> grad_phi;
  std::function<double(const Eigen::Vector2d&, double)> dphi_dt;

  ConvectionField w;
  double w_inf = 0.0;  // sup |w| over the box, sizes the activation strip

  ScalarField u_B_exact;
  ScalarField u_S_exact;
  ScalarField f_B;
  ScalarField f_S;
  ScalarField f_exchange;  // -k_B grad u_B . n with n = grad phi/|grad phi| (into the hole)
  ScalarField u_B_initial;
  ScalarField u_S_initial;
  BoundaryFlux outer_flux;  // k_B grad u_B . nu on the outer box boundary
};

/// The rotating-hole benchmark: a disk of radius 0.18 circling the center of
/// the unit square under rigid rotation, bulk solution
/// 0.5 + 0.4 cos(pi x) sin(pi y) cos(2 pi t), surface solution induced by the
/// exchange balance of the chosen model.
ManufacturedProblem build_manufactured_case(Model model);

/// Constant-pair case on the same geometry: zero sources, u_B = u_S = c,
/// linear exchange with unit weights.  Discretely reproducible.
ManufacturedProblem build_constant_case(double c);

}  // namespace stcutfem
