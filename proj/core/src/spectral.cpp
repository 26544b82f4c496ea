#include "nodalheat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nodalheat/errors.hpp"

namespace nodalheat {

namespace {

constexpr double kPivotFloor = 1e-290;
// Each sweep damps the unwanted components by roughly the bracket width over
// the spectral gap (~1e-12). Forty sweeps push them below the far-field
// values of eigenfunctions concentrated on scales of 1e-100 and less.
constexpr int kMinInverseIterations = 40;

// S / scale with squared off-diagonals, so Sturm counts stay in range for
// operators whose entries reach 1e100 and beyond.
struct ScaledTridiagonal {
  std::vector<double> diag;
  std::vector<double> off2;
  double scale = 1.0;
  double lower = 0.0, upper = 0.0;  // Gershgorin bounds (scaled)

  explicit ScaledTridiagonal(const RadialOperator& op) {
    const auto d = op.symmetric_diagonal();
    const auto b = op.symmetric_offdiagonal();
    const std::size_t n = d.size();
    scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double radius = (i > 0 ? std::fabs(b[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(b[i]) : 0.0);
      scale = std::max(scale, std::fabs(d[i]) + radius);
    }
    if (!(scale > 0.0)) scale = 1.0;
    diag.resize(n);
    off2.resize(n > 0 ? n - 1 : 0);
    lower = std::numeric_limits<double>::max();
    upper = -lower;
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = d[i] / scale;
      if (i + 1 < n) off2[i] = (b[i] / scale) * (b[i] / scale);
      const double radius =
          ((i > 0 ? std::fabs(b[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(b[i]) : 0.0)) / scale;
      lower = std::min(lower, diag[i] - radius);
      upper = std::max(upper, diag[i] + radius);
    }
  }

  [[nodiscard]] std::size_t count_below(double x) const {
    std::size_t count = 0;
    double q = diag[0] - x;
    for (std::size_t i = 0;;) {
      if (std::fabs(q) < kPivotFloor) q = -kPivotFloor;
      if (q < 0.0) ++count;
      if (++i == diag.size()) break;
      q = (diag[i] - x) - off2[i - 1] / q;
    }
    return count;
  }

  // Bracket [lo, hi] of the index-th eigenvalue, scaled units. The width is
  // relative to the eigenvalue, not to the scale: on strongly graded grids
  // the low eigenvalues can sit 1e-20 and more below the Gershgorin bound.
  [[nodiscard]] std::pair<double, double> bracket(std::size_t index, double tol) const {
    double lo = lower - 1e-12, hi = upper + 1e-12;
    for (int it = 0; it < 2200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hi - lo <= tol * std::fabs(mid) || !(mid > lo && mid < hi)) break;
      if (count_below(mid) > index) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return {lo, hi};
  }
};

// Solves (S - shift) y = rhs for symmetric tridiagonal S; false on a non-positive pivot.
bool solve_shifted(std::span<const double> d, std::span<const double> b, double shift,
                   std::span<const double> rhs, std::vector<double>& y) {
  const std::size_t n = d.size();
  std::vector<double> c(n), g(n);
  double piv = d[0] - shift;
  if (!(piv > 0.0)) return false;
  c[0] = (n > 1 ? b[0] : 0.0) / piv;
  g[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = (d[i] - shift) - b[i - 1] * c[i - 1];
    if (!(piv > 0.0)) return false;
    c[i] = (i + 1 < n ? b[i] : 0.0) / piv;
    g[i] = (rhs[i] - b[i - 1] * g[i - 1]) / piv;
  }
  y.assign(n, 0.0);
  y[n - 1] = g[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) y[i] = g[i] - c[i] * y[i + 1];
  return true;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

RadialOperator::RadialOperator(RadialGrid grid, std::vector<double> potential)
    : grid_(std::move(grid)), potential_(std::move(potential)) {
  if (potential_.size() != grid_.size()) {
    throw std::invalid_argument("potential length " + std::to_string(potential_.size()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  }
  const auto r = grid_.nodes();
  const std::size_t n = r.size() - 1;  // unknowns: all but the Dirichlet node
  const double pi = std::numbers::pi;

  a_diag_.assign(n, 0.0);
  a_off_.assign(n > 0 ? n - 1 : 0, 0.0);
  mass_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r_in = (i == 0) ? 0.0 : 0.5 * (r[i - 1] + r[i]);
    const double r_out = 0.5 * (r[i] + r[i + 1]);
    mass_[i] = pi * (r_out - r_in) * (r_out + r_in);
    const double g_out = 2.0 * pi * r_out / (r[i + 1] - r[i]);
    a_diag_[i] += g_out;
    if (i + 1 < n) {
      a_diag_[i + 1] += g_out;
      a_off_[i] = -g_out;
    }
  }

  s_diag_.resize(n);
  s_off_.resize(a_off_.size());
  for (std::size_t i = 0; i < n; ++i) s_diag_[i] = a_diag_[i] / mass_[i] - potential_[i];
  for (std::size_t i = 0; i + 1 < n; ++i) s_off_[i] = a_off_[i] / std::sqrt(mass_[i] * mass_[i + 1]);
}

std::vector<double> RadialOperator::apply(std::span<const double> phi) const {
  if (phi.size() != grid_.size()) throw std::invalid_argument("vector length does not match grid");
  const std::size_t n = dimension();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = (a_diag_[i] - mass_[i] * potential_[i]) * phi[i];
    if (i > 0) v += a_off_[i - 1] * phi[i - 1];
    if (i + 1 < n) v += a_off_[i] * phi[i + 1];
    out[i] = v;
  }
  return out;
}

RadialOperator assemble(const RadialGrid& grid, std::span<const double> potential) {
  return RadialOperator(grid, std::vector<double>(potential.begin(), potential.end()));
}

std::size_t count_eigenvalues_below(const RadialOperator& op, double x) {
  const ScaledTridiagonal t(op);
  return t.count_below(x / t.scale);
}

double eigenvalue_at(const RadialOperator& op, std::size_t index, double tol) {
  if (index >= op.dimension()) throw std::invalid_argument("eigenvalue index out of range");
  const ScaledTridiagonal t(op);
  const auto [lo, hi] = t.bracket(index, tol);
  return 0.5 * (lo + hi) * t.scale;
}

EigenPair first_eigenpair(const RadialOperator& op, double tol) {
  if (op.dimension() < 2) throw std::invalid_argument("operator too small for an eigen-solve");
  const ScaledTridiagonal t(op);
  auto [lo, hi] = t.bracket(0, tol);

  const auto d = op.symmetric_diagonal();
  const auto b = op.symmetric_offdiagonal();
  const std::size_t n = op.dimension();

  double shift = lo * t.scale;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    while (!solve_shifted(d, b, shift, x, y)) {
      // lo sat on (or above) the eigenvalue in floating point; back off.
      const double width = std::max(hi - lo, 4.0 * std::numeric_limits<double>::epsilon());
      lo -= width;
      shift = lo * t.scale;
    }
    const double ny = norm2(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) throw SolverFailure("inverse iteration produced a degenerate vector");
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= ny;
      change = std::max(change, std::fabs(y[i] - x[i]));
    }
    x.swap(y);
    if (change < 1e-13 && it >= kMinInverseIterations) {
      converged = true;
      break;
    }
  }
  if (!converged) throw SolverFailure("inverse iteration did not converge in 100 iterations");

  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum < 0.0) {
    for (auto& v : x) v = -v;
  }

  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += d[i] * x[i] * x[i];
    if (i + 1 < n) mu += 2.0 * b[i] * x[i] * x[i + 1];
  }
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = (d[i] - mu) * x[i];
    if (i > 0) v += b[i - 1] * x[i - 1];
    if (i + 1 < n) v += b[i] * x[i + 1];
    res += v * v;
  }

  EigenPair pair;
  pair.eigenvalue = mu;
  pair.residual = std::sqrt(res) / t.scale;
  pair.grid = op.grid();
  pair.eigenfunction.assign(op.grid().size(), 0.0);
  const auto m = op.mass();
  for (std::size_t i = 0; i < n; ++i) pair.eigenfunction[i] = x[i] / std::sqrt(m[i]);

  std::vector<double> sq(pair.eigenfunction.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = pair.eigenfunction[i] * pair.eigenfunction[i];
  const double norm = std::sqrt(integrate_disk(pair.grid, sq));
  for (auto& v : pair.eigenfunction) v /= norm;
  return pair;
}

EigenPair limit_eigenpair(double truncation_radius, std::size_t node_count) {
  if (!(truncation_radius >= 20.0)) throw std::invalid_argument("truncation radius must be at least 20");
  const auto grid = make_uniform_grid(node_count, truncation_radius);
  std::vector<double> w(grid.size());
  const auto r = grid.nodes();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = exp_z_star(r[i]);
  return first_eigenpair(assemble(grid, w));
}

RadialOperator linearized_operator(const StationarySolution& sol) {
  std::vector<double> w(sol.values.size());
  const double log_p = std::log(sol.p);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::fabs(sol.values[i]);
    w[i] = (a == 0.0) ? 0.0 : std::exp(log_p + (sol.p - 1.0) * std::log(a));
  }
  return RadialOperator(sol.grid, std::move(w));
}

RadialOperator rescaled_linearized_operator(const StationarySolution& sol, const RadialGrid& target) {
  auto v = potential(sol, target);
  return RadialOperator(target, std::move(v.values));
}

double rescaled_eigenvalue(const StationarySolution& sol, const EigenPair& pair) {
  if (pair.eigenvalue == 0.0) return 0.0;
  return std::copysign(std::exp(2.0 * sol.log_epsilon + std::log(std::fabs(pair.eigenvalue))), pair.eigenvalue);
}

RescaledProfile rescaled_eigenfunction(const StationarySolution& sol, const EigenPair& pair,
                                       const RadialGrid& target) {
  if (target.outer_radius() > sol.rescaled_radius() * (1.0 + 1e-12)) {
    throw std::invalid_argument("target grid exceeds the rescaled domain radius 1/eps");
  }
  RescaledProfile out;
  out.grid = target;
  out.kind = ProfileKind::Eigenfunction;
  out.source_p = sol.p;
  out.source_K = sol.K;
  out.domain_radius = sol.rescaled_radius();
  const auto x = target.nodes();
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::min(sol.epsilon * x[i], pair.grid.outer_radius());
    out.values[i] = sol.epsilon * interpolate(pair.grid, pair.eigenfunction, r);
  }
  return out;
}

double rayleigh(std::span<const double> w, std::span<const double> potential, const RadialGrid& grid) {
  if (w.size() != grid.size() || potential.size() != grid.size()) {
    throw std::invalid_argument("Rayleigh functional inputs must match the grid");
  }
  const auto dw = radial_derivative(grid, w);
  std::vector<double> f(w.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = dw[i] * dw[i] - potential[i] * w[i] * w[i];
  return integrate_disk(grid, f);
}

double discrete_rayleigh(const RadialOperator& op, std::span<const double> phi) {
  const auto a_phi = op.apply(phi);
  const auto m = op.mass();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < op.dimension(); ++i) {
    num += phi[i] * a_phi[i];
    den += m[i] * phi[i] * phi[i];
  }
  if (!(den > 0.0)) throw std::invalid_argument("trial function vanishes");
  return num / den;
}

}  // namespace nodalheat
