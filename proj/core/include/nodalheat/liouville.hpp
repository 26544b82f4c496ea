#pragma once

#include <vector>

#include "nodalheat/grid.hpp"
#include "nodalheat/shooting.hpp"

namespace nodalheat {

/// z*(r) = -2 log(1 + r^2/8), the radial solution of -Delta z = e^z in R^2
/// with z(0) = 0.
double z_star(double r);
double z_star_derivative(double r);
/// e^{z*(r)} = (1 + r^2/8)^{-2}.
double exp_z_star(double r);

/// Upper bound for the disk integral of e^{k z*} outside radius R, from
/// e^{z*} <= 64 / r^4. Requires power >= 1 and R > 0.
double exp_z_star_tail_bound(int power, double outer_radius);

/// Integral of e^{k z*} over R^2: grid quadrature on [0, R] plus the tail
/// bound. Exact values are 8 pi / (2k - 1).
double liouville_mass(const RadialGrid& grid, int power);

enum class ProfileKind { ZProfile, Potential, Eigenfunction };

/// A function of the rescaled radius x = r / eps_p, extended by zero
/// outside [0, domain_radius].
struct RescaledProfile {
  RadialGrid grid;
  std::vector<double> values;
  /// d/dx at the nodes when known in closed form; empty otherwise.
  std::vector<double> derivatives;
  ProfileKind kind = ProfileKind::ZProfile;
  double source_p = 0.0;
  int source_K = 0;
  double domain_radius = 0.0;

  [[nodiscard]] double value_at(double x) const;
};

/// z_p(x) = p/u(0) * (u(eps x) - u(0)) on target. The target grid must fit
/// inside the rescaled domain (std::invalid_argument otherwise).
RescaledProfile rescaled_profile(const StationarySolution& sol, const RadialGrid& target);

/// V_p(x) = |u(eps x)|^{p-1} / u(0)^{p-1} = |1 + z_p/p|^{p-1}, in [0, 1].
RescaledProfile potential(const StationarySolution& sol, const RadialGrid& target);

struct C1Gap {
  double value_gap = 0.0;
  double derivative_gap = 0.0;
};

/// sup over nodes with x <= compare_radius of |z_p - z*| and |z_p' - z*'|.
/// Only Z profiles are accepted.
C1Gap c1loc_distance(const RescaledProfile& profile, double compare_radius = 5.0);

}  // namespace nodalheat
