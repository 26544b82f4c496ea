#include "nodalheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nodalheat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_samples(const RadialGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("sample count " + std::to_string(samples.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
  }
}

// Composite-rule coefficients (without the step) for count points.
double rule_coefficient(std::size_t i, std::size_t count) {
  if (count % 2 == 1) {
    if (i == 0 || i + 1 == count) return 1.0 / 3.0;
    return (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  }
  return (i == 0 || i + 1 == count) ? 0.5 : 1.0;
}

}  // namespace

RadialGrid::RadialGrid(GridMapping mapping, std::size_t node_count, double outer_radius,
                       double core_scale)
    : mapping_(mapping), core_scale_(core_scale) {
  if (node_count < 3) throw std::invalid_argument("radial grid needs at least 3 nodes");
  if (!(outer_radius > 0.0) || !std::isfinite(outer_radius)) {
    throw std::invalid_argument("radial grid outer radius must be positive and finite");
  }
  if (!(core_scale > 0.0) || !std::isfinite(core_scale)) {
    throw std::invalid_argument("radial grid core scale must be positive and finite");
  }

  const auto n = node_count;
  nodes_.resize(n);
  jacobian_.resize(n);
  weights_.resize(n);

  if (mapping == GridMapping::Uniform) {
    core_scale_ = 1.0;
    dxi_ = outer_radius / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[i] = dxi_ * static_cast<double>(i);
      jacobian_[i] = 1.0;
    }
  } else {
    const double xi_max = std::asinh(outer_radius / core_scale);
    dxi_ = xi_max / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = dxi_ * static_cast<double>(i);
      nodes_[i] = core_scale * std::sinh(xi);
      jacobian_[i] = core_scale * std::cosh(xi);
    }
  }
  nodes_.front() = 0.0;
  nodes_.back() = outer_radius;

  for (std::size_t i = 0; i < n; ++i) {
    weights_[i] = kTwoPi * nodes_[i] * jacobian_[i] * dxi_ * rule_coefficient(i, n);
  }
}

RadialGrid RadialGrid::uniform(std::size_t node_count, double outer_radius) {
  return RadialGrid(GridMapping::Uniform, node_count, outer_radius, 1.0);
}

RadialGrid RadialGrid::graded(std::size_t node_count, double outer_radius, double core_scale) {
  return RadialGrid(GridMapping::Sinh, node_count, outer_radius, core_scale);
}

double RadialGrid::max_spacing() const {
  double h = 0.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) h = std::max(h, nodes_[i] - nodes_[i - 1]);
  return h;
}

double RadialGrid::fractional_index(double r) const {
  if (r <= 0.0) return 0.0;
  const double last = static_cast<double>(nodes_.size() - 1);
  if (r >= outer_radius()) return last;
  const double xi = (mapping_ == GridMapping::Uniform) ? r : std::asinh(r / core_scale_);
  return std::min(xi / dxi_, last);
}

RadialGrid RadialGrid::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("grid scale factor must be positive and finite");
  }
  RadialGrid out = *this;
  for (auto& r : out.nodes_) r *= factor;
  for (auto& j : out.jacobian_) j *= factor;
  for (auto& w : out.weights_) w *= factor * factor;
  if (mapping_ == GridMapping::Uniform) {
    out.dxi_ = dxi_ * factor;
    std::fill(out.jacobian_.begin(), out.jacobian_.end(), 1.0);
    for (std::size_t i = 0; i < out.weights_.size(); ++i) {
      out.weights_[i] = kTwoPi * out.nodes_[i] * out.dxi_ * rule_coefficient(i, out.size());
    }
  } else {
    out.core_scale_ = core_scale_ * factor;
  }
  return out;
}

std::string RadialGrid::signature() const {
  std::ostringstream os;
  os.precision(17);
  os << (mapping_ == GridMapping::Uniform ? "uniform" : "sinh") << ":n=" << size()
     << ":R=" << outer_radius() << ":c=" << core_scale_;
  return os.str();
}

RadialGrid make_uniform_grid(std::size_t node_count, double outer_radius) {
  return RadialGrid::uniform(node_count, outer_radius);
}

RadialGrid make_graded_grid(std::size_t node_count, double outer_radius, double core_scale) {
  return RadialGrid::graded(node_count, outer_radius, core_scale);
}

double integrate_disk(const RadialGrid& grid, std::span<const double> samples) {
  check_samples(grid, samples);
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) sum += w[i] * samples[i];
  return sum;
}

double integrate_annulus(const RadialGrid& grid, std::span<const double> samples, std::size_t first,
                         std::size_t last) {
  check_samples(grid, samples);
  if (first >= last || last >= grid.size()) {
    throw std::invalid_argument("annulus needs first < last < node count");
  }
  const auto r = grid.nodes();
  const auto jac = grid.jacobian();
  const std::size_t count = last - first + 1;
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = first + k;
    sum += rule_coefficient(k, count) * r[i] * jac[i] * samples[i];
  }
  return kTwoPi * grid.coordinate_step() * sum;
}

std::vector<double> radial_derivative(const RadialGrid& grid, std::span<const double> samples) {
  check_samples(grid, samples);
  const std::size_t n = grid.size();
  const double h = grid.coordinate_step();
  const auto jac = grid.jacobian();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d[i] = (samples[i + 1] - samples[i - 1]) / (2.0 * h) / jac[i];
  }
  d[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * h) / jac[n - 1];
  return d;
}

double interpolate(const RadialGrid& grid, std::span<const double> samples, double r) {
  check_samples(grid, samples);
  if (r < 0.0) throw std::invalid_argument("interpolation radius must be nonnegative");
  if (r > grid.outer_radius()) return 0.0;

  const auto n = static_cast<long>(grid.size());
  const double s = grid.fractional_index(r);
  long base = static_cast<long>(std::floor(s)) - 1;
  base = std::clamp(base, -1L, n - 4);
  const double t = s - static_cast<double>(base);

  // Lagrange basis on the integer stencil {0, 1, 2, 3} evaluated at t.
  const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
  const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
  const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;

  auto at = [&](long i) { return samples[static_cast<std::size_t>(i < 0 ? -i : i)]; };
  return l0 * at(base) + l1 * at(base + 1) + l2 * at(base + 2) + l3 * at(base + 3);
}

std::vector<double> resample(const RadialGrid& source, std::span<const double> samples,
                             const RadialGrid& target) {
  check_samples(source, samples);
  std::vector<double> out(target.size());
  const auto r = target.nodes();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = interpolate(source, samples, r[i]);
  return out;
}

}  // namespace nodalheat
