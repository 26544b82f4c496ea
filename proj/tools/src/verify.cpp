#include "nodalheat/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>

#include "nodalheat/analysis.hpp"
#include "nodalheat/evolution.hpp"
#include "nodalheat/liouville.hpp"

namespace nodalheat::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

void check(CriterionResult& r, bool ok, const std::string& line) {
  r.details.push_back(line + (ok ? "  [ok]" : "  [FAILED]"));
  if (!ok) r.passed = false;
}

const std::vector<double> kScanP{20.0, 50.0, 100.0, 200.0};
const std::vector<double> kTrendP{50.0, 100.0, 200.0};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

void liouville_constants(CriterionResult& r, Session&) {
  const auto grid = make_uniform_grid(20001, 200.0);
  for (int k = 1; k <= 3; ++k) {
    const double value = liouville_mass(grid, k);
    const double exact = 8.0 * kPi / (2.0 * k - 1.0);
    check(r, std::fabs(value - exact) <= 1e-3,
          format("int e^{%dz*} = %.9f, exact %.9f, |err| = %.2e <= 1e-3", k, value, exact, std::fabs(value - exact)));
  }
  const auto x = grid.nodes();
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = exp_z_star(x[i]);
  const double R = rayleigh(w, w, grid);
  check(r, std::fabs(R + 0.8 * kPi) <= 1e-3,
        format("R(e^{z*}) = %.9f, exact -4pi/5 = %.9f, |err| = %.2e <= 1e-3", R, -0.8 * kPi, std::fabs(R + 0.8 * kPi)));
}

void positive_asymptotics(CriterionResult& r, Session& s) {
  const double sqrt_e = std::exp(0.5);
  std::vector<double> amp;
  for (double p : kTrendP) amp.push_back(s.solution(p, 1).amplitude);
  const double rel = std::fabs(amp.back() - sqrt_e) / sqrt_e;
  check(r, rel <= 0.05, format("u_{200,1}(0) = %.6f, sqrt(e) = %.6f, rel. gap %.3f%% <= 5%%", amp.back(), sqrt_e, 100 * rel));
  const bool dec = strictly_decreasing(amp);
  const bool inc = strictly_increasing(amp);
  check(r, dec || inc,
        format("u_{p,1}(0) over p = 50, 100, 200: %.6f, %.6f, %.6f (%s)", amp[0], amp[1], amp[2],
               dec ? "strictly decreasing" : (inc ? "strictly increasing" : "not monotone")));
  const auto e = energy(s.solution(200.0, 1));
  const double target = 8.0 * kPi * std::exp(1.0);
  const double rel_e = std::fabs(e.p_times_dirichlet - target) / target;
  check(r, rel_e <= 0.10,
        format("p int|grad u_{200,1}|^2 = %.4f, 8 pi e = %.4f, rel. gap %.2f%% <= 10%%", e.p_times_dirichlet, target,
               100 * rel_e));
}

void energy_identities(CriterionResult& r, Session& s) {
  for (int K = 1; K <= 3; ++K) {
    for (double p : kScanP) {
      const auto e = energy(s.solution(p, K));
      const double nehari = e.nehari_residual / e.dirichlet;
      const double predicted = (p - 1.0) / (2.0 * (p + 1.0)) * e.dirichlet;
      const double energy_rel = std::fabs(e.energy - predicted) / std::fabs(predicted);
      check(r, nehari <= 1e-6 && energy_rel <= 1e-8,
            format("p = %3g K = %d: Nehari rel. %.2e <= 1e-6, energy rel. %.2e <= 1e-8", p, K, nehari, energy_rel));
    }
  }
}

void scaling_relation(CriterionResult& r, Session& s) {
  const double p = 50.0;
  const auto& one = s.solution(p, 1);
  for (int K : {2, 3}) {
    const auto& sol = s.solution(p, K);
    const double r1 = sol.nodal_radii.front();
    const double factor = std::pow(r1, 2.0 / (p - 1.0));
    double gap = 0.0;
    for (double x : one.grid.nodes()) {
      gap = std::max(gap, std::fabs(factor * sol.value_at(r1 * x) - one.value_at(x)));
    }
    check(r, gap <= 1e-6, format("p = 50, K = %d -> K = 1 reconstruction: sup gap %.2e <= 1e-6", K, gap));
  }
}

void spectral_convergence(CriterionResult& r, Session& s) {
  const double j01_sq = std::pow(bessel_j0_first_root(), 2);
  const auto disk = make_uniform_grid(4001, 1.0);
  const double mu = first_eigenpair(assemble(disk, std::vector<double>(disk.size(), 0.0))).eigenvalue;
  check(r, std::fabs(mu - j01_sq) <= 1e-4,
        format("zero-potential disk: lambda_1 = %.8f, j01^2 = %.8f, |err| = %.2e <= 1e-4", mu, j01_sq,
               std::fabs(mu - j01_sq)));

  const double star = s.limit_pair(40.0, 8001).eigenvalue;
  const double star80 = s.limit_pair(80.0, 16001).eigenvalue;
  check(r, std::fabs(star - star80) <= 1e-6,
        format("lambda_1* (R = 40) = %.10f, (R = 80) = %.10f, |diff| = %.2e <= 1e-6", star, star80,
               std::fabs(star - star80)));
  check(r, star <= -0.3, format("lambda_1* = %.6f <= -0.3", star));

  std::vector<double> gaps;
  std::string line = "|lambda~_1(p) - lambda_1*| for K = 2, p = 50, 100, 200:";
  for (double p : kTrendP) {
    const double lt = rescaled_eigenvalue(s.solution(p, 2), s.eigenpair(p, 2));
    gaps.push_back(std::fabs(lt - star));
    line += format(" %.3e", gaps.back());
  }
  check(r, strictly_decreasing(gaps), line + " (strictly decreasing)");
}

void sign_test_criterion(CriterionResult& r, Session& s) {
  const auto& limit = s.limit_pair(40.0, 8001);
  for (int K = 1; K <= 3; ++K) {
    for (double p : kScanP) {
      const auto rep = sign_test(s.solution(p, K), s.eigenpair(p, K), limit);
      check(r, rep.relative_identity_residual <= 1e-4,
            format("p = %3g K = %d: identity rel. residual %.2e <= 1e-4", p, K, rep.relative_identity_residual));
      r.reported.push_back(format("p = %3g K = %d: int u phi = %.6e, int |u|^{p-1}u phi = %.6e, normalized = %.6f", p, K,
                                  rep.integral_u_phi, rep.integral_up_phi, rep.normalized_integral));
    }
  }
  for (double p : {100.0, 200.0}) {
    const auto rep = sign_test(s.solution(p, 2), s.eigenpair(p, 2), limit);
    check(r, rep.integral_u_phi > 0.0, format("K = 2, p = %g: int u phi = %.6e > 0", p, rep.integral_u_phi));
  }
  const auto rep = sign_test(s.solution(200.0, 2), s.eigenpair(200.0, 2), limit);
  const double rel = std::fabs(rep.normalized_integral - rep.limit_value) / std::fabs(rep.limit_value);
  check(r, rep.normalized_integral > 0.0 && rep.limit_value > 0.0 && rel <= 0.2,
        format("K = 2, p = 200: normalized integral %.6f vs int e^{z*} phi* = %.6f, rel. gap %.3f%% <= 20%%",
               rep.normalized_integral, rep.limit_value, 100 * rel));
}

void c1_convergence(CriterionResult& r, Session& s) {
  std::vector<double> value_gaps, slope_gaps;
  for (double p : kTrendP) {
    const auto& sol = s.solution(p, 2);
    const auto gap = c1loc_distance(rescaled_profile(sol, make_uniform_grid(2001, 5.0)), 5.0);
    value_gaps.push_back(gap.value_gap);
    slope_gaps.push_back(gap.derivative_gap);
  }
  check(r, strictly_decreasing(value_gaps),
        format("sup_{x<=5} |z_p - z*|, p = 50, 100, 200: %.4e, %.4e, %.4e (strictly decreasing)", value_gaps[0],
               value_gaps[1], value_gaps[2]));
  check(r, strictly_decreasing(slope_gaps),
        format("sup_{x<=5} |z_p' - z*'|, p = 50, 100, 200: %.4e, %.4e, %.4e (strictly decreasing)", slope_gaps[0],
               slope_gaps[1], slope_gaps[2]));
}

void blowup_dichotomy(CriterionResult& r, Session& s) {
  const EvolutionControls controls;
  struct Case {
    double p;
    double lambda;
    Classification expected;
  };
  for (const Case& c : {Case{30.0, 0.1, Classification::GlobalDecay}, Case{30.0, 3.0, Classification::Blowup},
                        Case{200.0, 1.01, Classification::Blowup}}) {
    const auto out = evolve_classify(s.solution(c.p, 2), c.lambda, controls);
    std::string line = format("p = %g K = 2 lambda = %g: %s (expected %s)", c.p, c.lambda, to_string(out.classification),
                              to_string(c.expected));
    if (out.blowup_time_estimate) line += format(", T ~ %.4e", *out.blowup_time_estimate);
    check(r, out.classification == c.expected, line);
  }

  // Zero data is a fixed point, bit for bit.
  const auto& sol30 = s.solution(30.0, 2);
  const HeatStepper stepper(solution_grid(sol30.epsilon, controls.grid_nodes), 30.0);
  RadialField zero{0.0, std::vector<double>(stepper.grid().size(), 0.0)};
  bool exact = true;
  for (int i = 0; i < 10 && exact; ++i) {
    auto next = stepper.step(zero, 1e-3 * std::pow(2.0, i) * sol30.epsilon * sol30.epsilon);
    exact = next && std::all_of(next->values.begin(), next->values.end(), [](double v) { return v == 0.0; });
    if (next) zero = std::move(*next);
  }
  const auto zero_out = evolve_classify(sol30, 0.0, controls);
  for (const auto& tp : zero_out.supnorm_trace) exact = exact && tp.sup_norm == 0.0;
  check(r, exact, "v0 = 0 stays exactly 0 under the stepper and evolve_classify");

  // Linear regime: a tiny multiple of the disk ground state decays like exp(-j01^2 t).
  const double j01_sq = std::pow(bessel_j0_first_root(), 2);
  const auto disk = make_uniform_grid(2001, 1.0);
  auto ground = first_eigenpair(assemble(disk, std::vector<double>(disk.size(), 0.0))).eigenfunction;
  const double peak = ground.front();
  for (auto& v : ground) v *= 1e-6 / peak;
  const HeatStepper linear(disk, 3.0);
  const auto end = integrate_heat(linear, RadialField{0.0, ground}, 0.1, 1e-4, 1e-8);
  double sup = 0.0;
  for (double v : end.values) sup = std::max(sup, std::fabs(v));
  const double rate = sup / 1e-6;
  const double expected = std::exp(-0.1 * j01_sq);
  const double rel = std::fabs(rate - expected) / expected;
  check(r, rel <= 0.02,
        format("p = 3, delta = 1e-6: ||v(0.1)||/||v(0)|| = %.6f vs exp(-j01^2 0.1) = %.6f, rel. gap %.3f%% <= 2%%", rate,
               expected, 100 * rel));

  const auto near = evolve_classify(s.solution(200.0, 2), 0.99, controls);
  r.reported.push_back(format("p = 200 K = 2 lambda = 0.99: %s (reported only; the decay/blowup window below 1 is not "
                              "quantified)",
                              to_string(near.classification)));
}

void asymptotics_criterion(CriterionResult& r, Session& s) {
  std::vector<double> ratio;
  std::string line = "r_1/eps for K = 2, p = 20, 50, 100, 200:";
  for (double p : kScanP) {
    const auto& sol = s.solution(p, 2);
    ratio.push_back(std::exp(std::log(sol.nodal_radii.front()) - sol.log_epsilon));
    line += format(" %.4e", ratio.back());
  }
  check(r, strictly_increasing(ratio), line + " (strictly increasing)");
  const auto m = local_maxima(s.solution(200.0, 2));
  check(r, m[1] / m[0] < 0.5, format("M_2/M_1 at p = 200, K = 2: %.6f < 1/2", m[1] / m[0]));

  double lowest = std::numeric_limits<double>::infinity();
  for (int K = 1; K <= 3; ++K) {
    for (double p : kScanP) lowest = std::min(lowest, s.solution(p, K).amplitude);
  }
  r.reported.push_back(format("smallest u_{p,K}(0) over p in {20, 50, 100, 200}, K in {1, 2, 3}: %.6f", lowest));
}

struct Entry {
  const char* title;
  void (*run)(CriterionResult&, Session&);
};

const Entry kCriteria[kCriterionCount] = {
    {"Liouville constants", liouville_constants},
    {"Positive-solution asymptotics", positive_asymptotics},
    {"Nehari and energy identities", energy_identities},
    {"Scaling relation between nodal solutions", scaling_relation},
    {"Spectral convergence", spectral_convergence},
    {"Sign-test identity and limit", sign_test_criterion},
    {"C1_loc convergence of the rescaled profile", c1_convergence},
    {"Blowup dichotomy", blowup_dichotomy},
    {"Asymptotics table", asymptotics_criterion},
};

}  // namespace

double bessel_j0(double x) {
  // sum_k (-1)^k (x^2/4)^k / (k!)^2
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

double bessel_j0_first_root() {
  double lo = 2.0, hi = 3.0;  // J0(2) > 0 > J0(3)
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bessel_j0(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool VerifyReport::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

CriterionResult run_criterion(int id, Session& session) {
  if (id < 1 || id > kCriterionCount) throw std::invalid_argument("criterion id out of range");
  const Entry& e = kCriteria[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = e.title;
  r.passed = true;
  const auto start = std::chrono::steady_clock::now();
  try {
    e.run(r, session);
  } catch (const std::exception& ex) {
    check(r, false, std::string("solver error: ") + ex.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

VerifyReport run_verification(Session& session, const std::vector<int>& ids) {
  VerifyReport report;
  if (ids.empty()) {
    for (int id = 1; id <= kCriterionCount; ++id) report.criteria.push_back(run_criterion(id, session));
  } else {
    for (int id : ids) report.criteria.push_back(run_criterion(id, session));
  }
  return report;
}

nlohmann::json to_json(const VerifyReport& report) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : report.criteria) {
    list.push_back({{"id", c.id},
                    {"title", c.title},
                    {"passed", c.passed},
                    {"details", c.details},
                    {"reported", c.reported},
                    {"seconds", c.seconds}});
  }
  return {{"all_passed", report.all_passed()}, {"criteria", list}};
}

}  // namespace nodalheat::cli
