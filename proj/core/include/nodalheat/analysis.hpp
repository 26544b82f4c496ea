#pragma once

#include <cstddef>
#include <vector>

#include "nodalheat/shooting.hpp"
#include "nodalheat/spectral.hpp"

namespace nodalheat {

struct EnergyReport {
  /// E_p(u) = 1/2 int |grad u|^2 - 1/(p+1) int |u|^{p+1}.
  double energy = 0.0;
  double dirichlet = 0.0;
  double nonlinear = 0.0;
  double p_times_dirichlet = 0.0;
  /// |int |grad u|^2 - int |u|^{p+1}|, the Nehari defect.
  double nehari_residual = 0.0;
};

/// Disk integrals on the solution's grid, with u' taken from the trajectory
/// and |u|^{p+1} evaluated in log space.
EnergyReport energy(const StationarySolution& sol);

struct SignTestReport {
  double p = 0.0;
  int K = 0;
  double eigenvalue = 0.0;
  double integral_u_phi = 0.0;
  /// int |u|^{p-1} u phi.
  double integral_up_phi = 0.0;
  /// |(p-1)/(-lambda_1) * integral_up_phi - integral_u_phi|.
  double identity_residual = 0.0;
  /// identity_residual / |integral_u_phi|.
  double relative_identity_residual = 0.0;
  /// integral_up_phi / (u(0)^p eps).
  double normalized_integral = 0.0;
  /// int e^{z*} phi*, from the limit eigenpair.
  double limit_value = 0.0;
};

/// pair must be the first eigenpair of linearized_operator(sol) on sol.grid.
SignTestReport sign_test(const StationarySolution& sol, const EigenPair& pair, const EigenPair& limit_pair);

/// int e^{z*} phi over the limit pair's grid.
double limit_sign_integral(const EigenPair& limit_pair);

struct AsymptoticsRow {
  double p = 0.0;
  double amplitude = 0.0;
  double r1_over_eps = 0.0;  // nan when K = 1
  double m2_over_m1 = 0.0;   // nan when K = 1
  double eigenvalue = 0.0;
  double rescaled_eigenvalue = 0.0;
  double eigenfunction_gap = 0.0;
  double z_value_gap = 0.0;
  double z_derivative_gap = 0.0;
};

struct AsymptoticsOptions {
  std::size_t node_count = kDefaultSolutionNodes;
  double limit_radius = 40.0;
  std::size_t limit_nodes = 8001;
  double compare_radius = 5.0;
  std::size_t profile_nodes = 2001;
};

/// One row from an already computed solution and limit eigenpair.
AsymptoticsRow asymptotics_row(const StationarySolution& sol, const EigenPair& limit_pair,
                               const AsymptoticsOptions& options = {});

/// Rows in the order of p_list, each computed as an independent task.
/// p_list must be nonempty and ascending with every p > 1.
std::vector<AsymptoticsRow> asymptotics_table(int K, const std::vector<double>& p_list,
                                              const AsymptoticsOptions& options = {});

}  // namespace nodalheat
