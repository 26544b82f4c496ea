#include "nodalheat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "nodalheat/liouville.hpp"

namespace nodalheat {

namespace {

// sign(u) |u|^k / scale^k, in log space so p ~ hundreds cannot overflow.
double signed_power_ratio(double u, double k, double log_scale) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::exp(k * (std::log(std::fabs(u)) - log_scale)), u);
}

}  // namespace

EnergyReport energy(const StationarySolution& sol) {
  const auto r = sol.grid.nodes();
  const std::size_t n = r.size();
  const double log_a = std::log(sol.amplitude);
  std::vector<double> grad2(n), power(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double du = sol.derivative_at(r[i]);
    grad2[i] = du * du;
    power[i] = std::fabs(signed_power_ratio(sol.values[i], sol.p + 1.0, log_a));
  }
  EnergyReport rep;
  rep.dirichlet = integrate_disk(sol.grid, grad2);
  // int |u|^{p+1} = A^{p+1} int (|u|/A)^{p+1}
  const double scaled = integrate_disk(sol.grid, power);
  rep.nonlinear = scaled > 0.0 ? std::exp(std::log(scaled) + (sol.p + 1.0) * log_a) : 0.0;
  rep.energy = 0.5 * rep.dirichlet - rep.nonlinear / (sol.p + 1.0);
  rep.p_times_dirichlet = sol.p * rep.dirichlet;
  rep.nehari_residual = std::fabs(rep.dirichlet - rep.nonlinear);
  return rep;
}

double limit_sign_integral(const EigenPair& limit_pair) {
  const auto x = limit_pair.grid.nodes();
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = exp_z_star(x[i]) * limit_pair.eigenfunction[i];
  return integrate_disk(limit_pair.grid, f);
}

SignTestReport sign_test(const StationarySolution& sol, const EigenPair& pair, const EigenPair& limit_pair) {
  if (!(pair.grid == sol.grid) || pair.eigenfunction.size() != sol.values.size()) {
    throw std::invalid_argument("eigenpair must live on the solution grid");
  }
  const std::size_t n = sol.values.size();
  const double log_a = std::log(sol.amplitude);
  std::vector<double> u_phi(n), up_phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = pair.eigenfunction[i];
    u_phi[i] = sol.values[i] * phi;
    up_phi[i] = signed_power_ratio(sol.values[i], sol.p, log_a) * phi;
  }

  SignTestReport rep;
  rep.p = sol.p;
  rep.K = sol.K;
  rep.eigenvalue = pair.eigenvalue;
  rep.integral_u_phi = integrate_disk(sol.grid, u_phi);

  // scaled = int |u|^{p-1} u phi / u(0)^p
  const double scaled = integrate_disk(sol.grid, up_phi);
  if (scaled != 0.0) {
    const double log_abs = std::log(std::fabs(scaled));
    rep.integral_up_phi = std::copysign(std::exp(log_abs + sol.p * log_a), scaled);
    rep.normalized_integral = std::copysign(std::exp(log_abs - sol.log_epsilon), scaled);
  }

  // (p-1)/(-lambda) * A^p * scaled, assembled in log space as well.
  double lhs = 0.0;
  if (scaled != 0.0 && pair.eigenvalue != 0.0) {
    const double log_lhs =
        std::log(sol.p - 1.0) - std::log(std::fabs(pair.eigenvalue)) + std::log(std::fabs(scaled)) + sol.p * log_a;
    lhs = std::copysign(std::exp(log_lhs), -pair.eigenvalue * scaled);
  }
  rep.identity_residual = std::fabs(lhs - rep.integral_u_phi);
  rep.relative_identity_residual = rep.integral_u_phi != 0.0 ? rep.identity_residual / std::fabs(rep.integral_u_phi)
                                                             : std::numeric_limits<double>::infinity();
  rep.limit_value = limit_sign_integral(limit_pair);
  return rep;
}

AsymptoticsRow asymptotics_row(const StationarySolution& sol, const EigenPair& limit_pair,
                               const AsymptoticsOptions& options) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  AsymptoticsRow row;
  row.p = sol.p;
  row.amplitude = sol.amplitude;
  row.r1_over_eps = nan;
  row.m2_over_m1 = nan;
  if (sol.K >= 2) {
    row.r1_over_eps = std::exp(std::log(sol.nodal_radii.front()) - sol.log_epsilon);
    const auto m = local_maxima(sol);
    row.m2_over_m1 = m[1] / m[0];
  }

  const auto pair = first_eigenpair(linearized_operator(sol));
  row.eigenvalue = pair.eigenvalue;
  row.rescaled_eigenvalue = rescaled_eigenvalue(sol, pair);

  // phi~(x) = eps phi(eps x) on the limit grid; interpolate() already
  // extends phi by zero beyond the unit radius.
  const auto x = limit_pair.grid.nodes();
  std::vector<double> diff2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = sol.epsilon * interpolate(pair.grid, pair.eigenfunction, std::min(1.0, sol.epsilon * x[i]));
    const double d = (sol.epsilon * x[i] > 1.0 ? 0.0 : scaled) - limit_pair.eigenfunction[i];
    diff2[i] = d * d;
  }
  row.eigenfunction_gap = std::sqrt(integrate_disk(limit_pair.grid, diff2));

  const double radius = std::min(options.compare_radius, sol.rescaled_radius());
  const auto profile = rescaled_profile(sol, make_uniform_grid(options.profile_nodes, radius));
  const auto gap = c1loc_distance(profile, radius);
  row.z_value_gap = gap.value_gap;
  row.z_derivative_gap = gap.derivative_gap;
  return row;
}

std::vector<AsymptoticsRow> asymptotics_table(int K, const std::vector<double>& p_list,
                                              const AsymptoticsOptions& options) {
  if (K < 1) throw std::invalid_argument("nodal region count K must be at least 1");
  if (p_list.empty()) throw std::invalid_argument("p list must not be empty");
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (!(p_list[i] > 1.0)) throw std::invalid_argument("every exponent p must exceed 1");
    if (i > 0 && !(p_list[i] > p_list[i - 1])) throw std::invalid_argument("p list must be ascending");
  }
  const auto limit_pair = limit_eigenpair(options.limit_radius, options.limit_nodes);
  std::vector<std::future<AsymptoticsRow>> tasks;
  tasks.reserve(p_list.size());
  for (double p : p_list) {
    tasks.push_back(std::async(std::launch::async, [p, K, &limit_pair, &options] {
      return asymptotics_row(stationary_solution(p, K, options.node_count), limit_pair, options);
    }));
  }
  std::vector<AsymptoticsRow> rows;
  rows.reserve(tasks.size());
  for (auto& t : tasks) rows.push_back(t.get());
  return rows;
}

}  // namespace nodalheat
