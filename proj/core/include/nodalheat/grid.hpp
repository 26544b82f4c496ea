#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nodalheat {

/// How grid nodes are laid out in the computational coordinate xi.
///
/// Uniform: r = xi.
/// Sinh:    r = c * sinh(xi). Spacing is ~c*dxi near the origin and grows
///          geometrically once r >> c, so one grid can resolve a core of
///          width c and an outer region many decades larger.
enum class GridMapping { Uniform, Sinh };

/// Discretization of [0, R] for radially symmetric functions on a 2D disk.
///
/// Nodes are equally spaced in xi. Quadrature weights already contain the
/// 2 pi r dr measure, so sum(w_i f_i) approximates the disk integral of f.
class RadialGrid {
 public:
  RadialGrid() = default;

  static RadialGrid uniform(std::size_t node_count, double outer_radius);
  static RadialGrid graded(std::size_t node_count, double outer_radius, double core_scale);

  [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  /// dr/dxi at every node.
  [[nodiscard]] std::span<const double> jacobian() const noexcept { return jacobian_; }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] double outer_radius() const noexcept { return nodes_.empty() ? 0.0 : nodes_.back(); }
  [[nodiscard]] double coordinate_step() const noexcept { return dxi_; }
  [[nodiscard]] GridMapping mapping() const noexcept { return mapping_; }
  [[nodiscard]] double core_scale() const noexcept { return core_scale_; }
  [[nodiscard]] double max_spacing() const;

  /// Position of r in units of the node index (e.g. 2.5 lies halfway between
  /// nodes 2 and 3). Requires 0 <= r <= R.
  [[nodiscard]] double fractional_index(double r) const;

  /// The same grid with every radius multiplied by factor > 0.
  [[nodiscard]] RadialGrid scaled(double factor) const;

  /// Stable text identity of the layout, used for cache keys.
  [[nodiscard]] std::string signature() const;

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  RadialGrid(GridMapping mapping, std::size_t node_count, double outer_radius, double core_scale);

  GridMapping mapping_ = GridMapping::Uniform;
  double core_scale_ = 1.0;
  double dxi_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> jacobian_;
};

/// node_count >= 3, outer_radius > 0; otherwise std::invalid_argument.
RadialGrid make_uniform_grid(std::size_t node_count, double outer_radius);

/// Sinh-graded grid; core_scale > 0 sets the width of the finely resolved core.
RadialGrid make_graded_grid(std::size_t node_count, double outer_radius, double core_scale);

/// Composite Simpson (odd node count) or trapezoid (even) approximation of
/// 2 pi * integral_0^R f(r) r dr.
double integrate_disk(const RadialGrid& grid, std::span<const double> samples);

/// Same rule restricted to the annulus [nodes[first], nodes[last]].
double integrate_annulus(const RadialGrid& grid, std::span<const double> samples, std::size_t first,
                         std::size_t last);

/// df/dr at every node. Second-order central differences in xi inside,
/// second-order one-sided at the outer end, and 0 at r = 0 (radial data is even).
std::vector<double> radial_derivative(const RadialGrid& grid, std::span<const double> samples);

/// Four-point Lagrange interpolation in xi, using the even reflection of
/// radial data across r = 0. Returns 0 for r > R (extension by zero).
double interpolate(const RadialGrid& grid, std::span<const double> samples, double r);

/// interpolate() evaluated at every node of target.
std::vector<double> resample(const RadialGrid& source, std::span<const double> samples,
                             const RadialGrid& target);

}  // namespace nodalheat
