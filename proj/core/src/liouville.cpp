#include "nodalheat/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nodalheat {

double z_star(double r) {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  return -2.0 * std::log1p(r * r / 8.0);
}

double z_star_derivative(double r) {
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
  return -r / (2.0 * (1.0 + r * r / 8.0));
}

double exp_z_star(double r) {
  const double q = 1.0 + r * r / 8.0;
  return 1.0 / (q * q);
}

double exp_z_star_tail_bound(int power, double outer_radius) {
  if (power < 1 || !(outer_radius > 0.0)) throw std::invalid_argument("tail bound needs power >= 1 and R > 0");
  const double k = power;
  // 2 pi int_R^inf (64 / r^4)^k r dr
  return 2.0 * std::numbers::pi * std::pow(64.0, k) * std::pow(outer_radius, 2.0 - 4.0 * k) / (4.0 * k - 2.0);
}

double liouville_mass(const RadialGrid& grid, int power) {
  if (power < 1) throw std::invalid_argument("power must be at least 1");
  const auto r = grid.nodes();
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = std::pow(exp_z_star(r[i]), power);
  return integrate_disk(grid, f) + exp_z_star_tail_bound(power, grid.outer_radius());
}

double RescaledProfile::value_at(double x) const {
  if (x > domain_radius) return 0.0;
  return interpolate(grid, values, x);
}

namespace {

void check_target(const StationarySolution& sol, const RadialGrid& target) {
  if (target.outer_radius() > sol.rescaled_radius() * (1.0 + 1e-12)) {
    throw std::invalid_argument("target grid exceeds the rescaled domain radius 1/eps");
  }
}

}  // namespace

RescaledProfile rescaled_profile(const StationarySolution& sol, const RadialGrid& target) {
  check_target(sol, target);
  RescaledProfile out;
  out.grid = target;
  out.kind = ProfileKind::ZProfile;
  out.source_p = sol.p;
  out.source_K = sol.K;
  out.domain_radius = sol.rescaled_radius();
  const auto x = target.nodes();
  out.values.resize(x.size());
  out.derivatives.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.values[i] = sol.p * (sol.normalized_at_rescaled(x[i]) - 1.0);
    out.derivatives[i] = sol.p * sol.normalized_slope_at_rescaled(x[i]);
  }
  out.values.front() = 0.0;
  out.derivatives.front() = 0.0;
  return out;
}

RescaledProfile potential(const StationarySolution& sol, const RadialGrid& target) {
  check_target(sol, target);
  RescaledProfile out;
  out.grid = target;
  out.kind = ProfileKind::Potential;
  out.source_p = sol.p;
  out.source_K = sol.K;
  out.domain_radius = sol.rescaled_radius();
  const auto x = target.nodes();
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::fabs(sol.normalized_at_rescaled(x[i]));
    out.values[i] = (a == 0.0) ? 0.0 : std::min(1.0, std::exp((sol.p - 1.0) * std::log(a)));
  }
  out.values.front() = 1.0;
  return out;
}

C1Gap c1loc_distance(const RescaledProfile& profile, double compare_radius) {
  if (profile.kind != ProfileKind::ZProfile) {
    throw std::invalid_argument("C1 distance is defined for Z profiles only");
  }
  if (!(compare_radius > 0.0) || compare_radius > profile.grid.outer_radius() * (1.0 + 1e-12) ||
      compare_radius > profile.domain_radius) {
    throw std::invalid_argument("compare radius must be positive and inside the profile domain");
  }
  const std::vector<double> slope =
      profile.derivatives.empty() ? radial_derivative(profile.grid, profile.values) : profile.derivatives;
  const auto x = profile.grid.nodes();
  C1Gap gap;
  for (std::size_t i = 0; i < x.size() && x[i] <= compare_radius; ++i) {
    gap.value_gap = std::max(gap.value_gap, std::fabs(profile.values[i] - z_star(x[i])));
    gap.derivative_gap = std::max(gap.derivative_gap, std::fabs(slope[i] - z_star_derivative(x[i])));
  }
  return gap;
}

}  // namespace nodalheat
