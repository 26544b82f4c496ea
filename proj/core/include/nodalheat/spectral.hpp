#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nodalheat/grid.hpp"
#include "nodalheat/liouville.hpp"
#include "nodalheat/shooting.hpp"

namespace nodalheat {

/// Finite-volume discretization of -Delta - W for radial functions on
/// [0, R], with phi'(0) = 0 and phi(R) = 0.
///
/// Unknowns live on nodes 0 .. n-2; the outer node carries the Dirichlet
/// value. The discrete problem is A phi - M W phi = lambda M phi with A the
/// symmetric tridiagonal flux matrix and M the diagonal of control-volume
/// areas. It is solved in the symmetric form S = M^{-1/2} A M^{-1/2} - W.
class RadialOperator {
 public:
  RadialOperator() = default;
  RadialOperator(RadialGrid grid, std::vector<double> potential);

  [[nodiscard]] const RadialGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> potential() const noexcept { return potential_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return mass_.size(); }

  [[nodiscard]] std::span<const double> stiffness_diagonal() const noexcept { return a_diag_; }
  /// A(i, i+1) = A(i+1, i).
  [[nodiscard]] std::span<const double> stiffness_offdiagonal() const noexcept { return a_off_; }
  [[nodiscard]] std::span<const double> mass() const noexcept { return mass_; }

  [[nodiscard]] std::span<const double> symmetric_diagonal() const noexcept { return s_diag_; }
  [[nodiscard]] std::span<const double> symmetric_offdiagonal() const noexcept { return s_off_; }

  /// (A - M W) phi for phi given on all grid nodes (outer value ignored).
  [[nodiscard]] std::vector<double> apply(std::span<const double> phi) const;

 private:
  RadialGrid grid_;
  std::vector<double> potential_;
  std::vector<double> a_diag_, a_off_, mass_;
  std::vector<double> s_diag_, s_off_;
};

/// potential length must match the grid (std::invalid_argument otherwise).
RadialOperator assemble(const RadialGrid& grid, std::span<const double> potential);

struct EigenPair {
  double eigenvalue = 0.0;
  /// On every grid node, zero at the outer node, L2(disk)-normalized and positive inside.
  std::vector<double> eigenfunction;
  RadialGrid grid;
  /// ||S psi - lambda psi|| / ||S||, with psi = M^{1/2} phi.
  double residual = 0.0;
};

/// Number of eigenvalues strictly below x (Sturm sequence count).
std::size_t count_eigenvalues_below(const RadialOperator& op, double x);

/// index-th smallest eigenvalue (0-based) by Sturm bisection to relative tol.
double eigenvalue_at(const RadialOperator& op, std::size_t index, double tol = 1e-12);

/// Smallest eigenvalue by Sturm bisection, eigenvector by shifted inverse
/// iteration. Throws SolverFailure if inverse iteration does not settle.
EigenPair first_eigenpair(const RadialOperator& op, double tol = 1e-12);

/// First eigenpair of -Delta - e^{z*} on the uniform grid over [0, R].
/// truncation_radius >= 20.
EigenPair limit_eigenpair(double truncation_radius = 40.0, std::size_t node_count = 8001);

/// L_p = -Delta - p |u|^{p-1} on the solution's own grid.
RadialOperator linearized_operator(const StationarySolution& sol);

/// The rescaled operator -Delta - V_p on a grid in x = r / eps.
RadialOperator rescaled_linearized_operator(const StationarySolution& sol, const RadialGrid& target);

/// eps_p^2 * lambda_1(p).
double rescaled_eigenvalue(const StationarySolution& sol, const EigenPair& pair);

/// phi~(x) = eps phi(eps x), extended by zero beyond 1/eps.
RescaledProfile rescaled_eigenfunction(const StationarySolution& sol, const EigenPair& pair,
                                       const RadialGrid& target);

/// Quadrature of |w'|^2 - W w^2 against 2 pi r dr.
double rayleigh(std::span<const double> w, std::span<const double> potential, const RadialGrid& grid);

/// phi^T (A - M W) phi / phi^T M phi, the quotient the eigensolver minimizes.
double discrete_rayleigh(const RadialOperator& op, std::span<const double> phi);

}  // namespace nodalheat
