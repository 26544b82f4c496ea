#include "nodalheat/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <limits>
#include <ostream>
#include <string_view>

#include <CLI11.hpp>

#include "nodalheat/analysis.hpp"
#include "nodalheat/cli/config.hpp"
#include "nodalheat/cli/report.hpp"
#include "nodalheat/cli/session.hpp"
#include "nodalheat/cli/verify.hpp"
#include "nodalheat/errors.hpp"
#include "nodalheat/evolution.hpp"
#include "nodalheat/liouville.hpp"

namespace nodalheat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  const RunConfig& cfg;
  Session& session;
  std::ostream& out;
  fs::path dir;
};

json cmd_stationary(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  CsvWriter csv(c.dir / "stationary_profile.csv", {"r", "u"});
  const auto r = sol.grid.nodes();
  for (std::size_t i = 0; i < r.size(); ++i) csv.row(std::vector<double>{r[i], sol.values[i]});
  return {{"p", sol.p},
          {"K", sol.K},
          {"amplitude", sol.amplitude},
          {"epsilon", sol.epsilon},
          {"log_epsilon", sol.log_epsilon},
          {"log_outer_zero", sol.log_outer_zero},
          {"nodal_radii", sol.nodal_radii},
          {"local_maxima", local_maxima(sol)},
          {"grid", sol.grid.signature()}};
}

json cmd_spectrum(Context& c) {
  if (c.cfg.limit) {
    const auto& pair = c.session.limit_pair(c.cfg.R, c.cfg.limit_nodes);
    CsvWriter csv(c.dir / "spectrum_limit_eigenfunction.csv", {"x", "phi"});
    const auto x = pair.grid.nodes();
    for (std::size_t i = 0; i < x.size(); ++i) csv.row(std::vector<double>{x[i], pair.eigenfunction[i]});
    return {{"operator", "limit"},
            {"R", c.cfg.R},
            {"nodes", c.cfg.limit_nodes},
            {"eigenvalue", pair.eigenvalue},
            {"residual", pair.residual},
            {"integral_exp_z_star_phi", limit_sign_integral(pair)}};
  }
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const auto& pair = c.session.eigenpair(c.cfg.p, c.cfg.K);
  const auto direct = first_eigenpair(rescaled_linearized_operator(sol, sol.grid.scaled(1.0 / sol.epsilon)));
  const double second = eigenvalue_at(linearized_operator(sol), 1);
  CsvWriter csv(c.dir / "spectrum_eigenfunction.csv", {"r", "phi"});
  const auto r = pair.grid.nodes();
  for (std::size_t i = 0; i < r.size(); ++i) csv.row(std::vector<double>{r[i], pair.eigenfunction[i]});
  return {{"operator", "linearized"},
          {"p", sol.p},
          {"K", sol.K},
          {"eigenvalue", pair.eigenvalue},
          {"second_eigenvalue", second},
          {"residual", pair.residual},
          {"rescaled_eigenvalue", rescaled_eigenvalue(sol, pair)},
          {"rescaled_eigenvalue_direct", direct.eigenvalue}};
}

json cmd_liouville(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const double radius = std::min(c.cfg.compare_radius, sol.rescaled_radius());
  const auto grid = make_uniform_grid(2001, radius);
  const auto z = rescaled_profile(sol, grid);
  const auto v = potential(sol, grid);
  const auto gap = c1loc_distance(z, radius);
  double potential_gap = 0.0;
  CsvWriter csv(c.dir / "liouville_profile.csv", {"x", "z_p", "dz_p", "z_star", "dz_star", "V_p", "exp_z_star"});
  const auto x = grid.nodes();
  for (std::size_t i = 0; i < x.size(); ++i) {
    potential_gap = std::max(potential_gap, std::fabs(v.values[i] - exp_z_star(x[i])));
    csv.row(std::vector<double>{x[i], z.values[i], z.derivatives[i], z_star(x[i]), z_star_derivative(x[i]), v.values[i],
                                exp_z_star(x[i])});
  }
  const auto wide = make_uniform_grid(20001, 200.0);
  const auto xs = wide.nodes();
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) w[i] = exp_z_star(xs[i]);
  return {{"p", sol.p},
          {"K", sol.K},
          {"compare_radius", radius},
          {"value_gap", gap.value_gap},
          {"derivative_gap", gap.derivative_gap},
          {"potential_gap", potential_gap},
          {"mass_exp_z_star", liouville_mass(wide, 1)},
          {"mass_exp_2z_star", liouville_mass(wide, 2)},
          {"mass_exp_3z_star", liouville_mass(wide, 3)},
          {"rayleigh_exp_z_star", rayleigh(w, w, wide)}};
}

json cmd_energy(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const auto e = energy(sol);
  return {{"p", sol.p},
          {"K", sol.K},
          {"energy", e.energy},
          {"dirichlet", e.dirichlet},
          {"nonlinear", e.nonlinear},
          {"p_times_dirichlet", e.p_times_dirichlet},
          {"nehari_residual", e.nehari_residual},
          {"nehari_relative", e.nehari_residual / e.dirichlet}};
}

json cmd_signtest(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const auto rep = sign_test(sol, c.session.eigenpair(c.cfg.p, c.cfg.K), c.session.limit_pair(c.cfg.R, c.cfg.limit_nodes));
  return {{"p", rep.p},
          {"K", rep.K},
          {"eigenvalue", rep.eigenvalue},
          {"integral_u_phi", rep.integral_u_phi},
          {"integral_up_phi", rep.integral_up_phi},
          {"identity_residual", rep.identity_residual},
          {"relative_identity_residual", rep.relative_identity_residual},
          {"normalized_integral", rep.normalized_integral},
          {"limit_value", rep.limit_value}};
}

json outcome_json(const EvolutionOutcome& o) {
  return {{"lambda", o.lambda},
          {"classification", to_string(o.classification)},
          {"blowup_time_estimate", o.blowup_time_estimate ? json(*o.blowup_time_estimate) : json(nullptr)},
          {"final_time", o.final_time},
          {"final_sup_norm", o.supnorm_trace.back().sup_norm},
          {"steps", o.steps}};
}

json cmd_evolve(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const auto o = evolve_classify(sol, c.cfg.lambda, c.cfg.evolution);
  CsvWriter csv(c.dir / "evolve_trace.csv", {"t", "sup_norm"});
  for (const auto& tp : o.supnorm_trace) csv.row(std::vector<double>{tp.t, tp.sup_norm});
  auto j = outcome_json(o);
  j["p"] = sol.p;
  j["K"] = sol.K;
  j["epsilon_squared"] = std::exp(2.0 * sol.log_epsilon);
  return j;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json cmd_scan(Context& c) {
  const auto& sol = c.session.solution(c.cfg.p, c.cfg.K);
  const auto outcomes = lambda_scan(sol, c.cfg.lambdas, c.cfg.evolution);
  CsvWriter csv(c.dir / "scan_outcomes.csv",
                {"lambda", "classification", "blowup_time_estimate", "final_time", "final_sup_norm", "steps"});
  json list = json::array();
  for (const auto& o : outcomes) {
    csv.row(std::vector<std::string>{num(o.lambda), to_string(o.classification),
                                     o.blowup_time_estimate ? num(*o.blowup_time_estimate) : "",
                                     num(o.final_time), num(o.supnorm_trace.back().sup_norm),
                                     std::to_string(o.steps)});
    list.push_back(outcome_json(o));
  }
  const auto w = empirical_window(c.cfg.lambdas, outcomes);
  return {{"p", sol.p},
          {"K", sol.K},
          {"outcomes", list},
          {"window",
           {{"below_one_last_decay", optional_json(w.below_decay)},
            {"below_one_first_blowup", optional_json(w.below_blowup)},
            {"above_one_last_non_blowup", optional_json(w.above_not_blowup)},
            {"above_one_first_blowup", optional_json(w.above_blowup)}}}};
}

json cmd_asymptotics(Context& c) {
  AsymptoticsOptions options;
  options.node_count = c.cfg.nodes;
  options.limit_radius = c.cfg.R;
  options.limit_nodes = c.cfg.limit_nodes;
  options.compare_radius = c.cfg.compare_radius;
  const auto& limit = c.session.limit_pair(c.cfg.R, c.cfg.limit_nodes);
  std::vector<std::future<AsymptoticsRow>> tasks;
  for (double p : c.cfg.p_list) {
    const auto& sol = c.session.solution(p, c.cfg.K);
    tasks.push_back(std::async(std::launch::async, [&sol, &limit, &options] { return asymptotics_row(sol, limit, options); }));
  }
  CsvWriter csv(c.dir / "asymptotics_table.csv",
                {"p", "amplitude", "r1_over_eps", "m2_over_m1", "lambda_1", "rescaled_lambda_1",
                 "eigenfunction_l2_gap", "z_value_gap", "z_derivative_gap"});
  json rows = json::array();
  double lowest = std::numeric_limits<double>::infinity();
  for (auto& t : tasks) {
    const auto r = t.get();
    csv.row(std::vector<double>{r.p, r.amplitude, r.r1_over_eps, r.m2_over_m1, r.eigenvalue, r.rescaled_eigenvalue,
                                r.eigenfunction_gap, r.z_value_gap, r.z_derivative_gap});
    rows.push_back({{"p", r.p},
                    {"amplitude", r.amplitude},
                    {"r1_over_eps", number_or_null(r.r1_over_eps)},
                    {"m2_over_m1", number_or_null(r.m2_over_m1)},
                    {"lambda_1", r.eigenvalue},
                    {"rescaled_lambda_1", r.rescaled_eigenvalue},
                    {"eigenfunction_l2_gap", r.eigenfunction_gap},
                    {"z_value_gap", r.z_value_gap},
                    {"z_derivative_gap", r.z_derivative_gap}});
    lowest = std::min(lowest, r.amplitude);
  }
  return {{"K", c.cfg.K}, {"limit_eigenvalue", limit.eigenvalue}, {"smallest_amplitude", lowest}, {"rows", rows}};
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    constexpr std::string_view prefix = "--config=";
    if (args[i].rfind(prefix, 0) == 0) return args[i].substr(prefix.size());
  }
  return std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (const auto path = find_config_path(args)) apply_json_file(cfg, *path);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App app{"Numerical laboratory for sign-changing radial Lane-Emden solutions and the nonlinear heat flow"};
  app.require_subcommand(1);
  std::string config_path;
  bool no_cache = !cfg.use_cache;
  std::vector<int> criteria;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with config keys; flags given here override it");
    sub->add_option("--out", cfg.out_dir, "Directory for CSV files and the JSON summary");
    sub->add_option("--cache-dir", cfg.cache_dir, "Cache directory (default: $NODALHEAT_CACHE_DIR or .nodalheat-cache)");
    sub->add_flag("--no-cache", no_cache, "Neither read nor write the on-disk cache");
    sub->add_option("--nodes", cfg.nodes, "Nodes of the epsilon-adapted unit-disk grid");
  };
  auto solution_opts = [&](CLI::App* sub) {
    sub->add_option("--p", cfg.p, "Exponent p > 1");
    sub->add_option("--K", cfg.K, "Number of nodal regions K >= 1");
  };
  auto limit_opts = [&](CLI::App* sub) {
    sub->add_option("--R", cfg.R, "Truncation radius of the limit operator (>= 20)");
    sub->add_option("--limit-nodes", cfg.limit_nodes, "Nodes of the limit-operator grid");
  };
  auto evolution_opts = [&](CLI::App* sub) {
    sub->add_option("--t-max", cfg.evolution.t_max, "Final time");
    sub->add_option("--dt-init", cfg.evolution.dt_init, "Initial step in units of eps^2");
    sub->add_option("--dt-floor", cfg.evolution.dt_floor, "Blowup step floor in units of eps^2");
    sub->add_option("--blowup-threshold", cfg.evolution.blowup_threshold, "Sup norm that counts as blowup (>= 1e6)");
    sub->add_option("--decay-threshold", cfg.evolution.decay_threshold, "Decay ratio ||v||/||v0|| for GlobalDecay");
    sub->add_option("--rel-tol", cfg.evolution.rel_tol, "Relative local error tolerance");
    sub->add_option("--evolution-nodes", cfg.evolution.grid_nodes, "Nodes of the evolution grid");
    sub->add_option("--max-steps", cfg.evolution.max_steps, "Step budget before Undecided");
  };

  auto* stationary = app.add_subcommand("stationary", "Compute and cache u_{p,K}");
  common(stationary);
  solution_opts(stationary);

  auto* spectrum = app.add_subcommand("spectrum", "First eigenpair of L_p, or of the limit operator with --limit");
  common(spectrum);
  solution_opts(spectrum);
  limit_opts(spectrum);
  spectrum->add_flag("--limit", cfg.limit, "Solve -Delta - e^{z*} on [0, R] instead of L_p");

  auto* liouville = app.add_subcommand("liouville", "Rescaled profile z_p and potential V_p against the Liouville limit");
  common(liouville);
  solution_opts(liouville);
  liouville->add_option("--compare-radius", cfg.compare_radius, "Radius of the C1 comparison");

  auto* energy_cmd = app.add_subcommand("energy", "Energy, p times Dirichlet integral and Nehari defect");
  common(energy_cmd);
  solution_opts(energy_cmd);

  auto* signtest = app.add_subcommand("signtest", "Integrals of u phi_1 and |u|^{p-1} u phi_1");
  common(signtest);
  solution_opts(signtest);
  limit_opts(signtest);

  auto* evolve = app.add_subcommand("evolve", "Evolve lambda u_{p,K} and classify");
  common(evolve);
  solution_opts(evolve);
  evolution_opts(evolve);
  evolve->add_option("--lambda", cfg.lambda, "Initial data multiplier");

  auto* scan = app.add_subcommand("scan", "Classify a list of lambda values in parallel");
  common(scan);
  solution_opts(scan);
  evolution_opts(scan);
  scan->add_option("--lambdas", cfg.lambdas, "Comma-separated lambda values")->delimiter(',');

  auto* asymptotics = app.add_subcommand("asymptotics", "Asymptotics table over a list of p");
  common(asymptotics);
  asymptotics->add_option("--K", cfg.K, "Number of nodal regions K >= 1");
  asymptotics->add_option("--p-list", cfg.p_list, "Comma-separated ascending exponents")->delimiter(',');
  limit_opts(asymptotics);
  asymptotics->add_option("--compare-radius", cfg.compare_radius, "Radius of the C1 comparison");

  auto* verify = app.add_subcommand("verify", "Run the acceptance criteria");
  common(verify);
  verify->add_option("--criteria", criteria, "Comma-separated criterion numbers (default: all)")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  for (auto* sub : chosen->get_subcommands()) {
    if (sub->parsed()) {
      out << sub->help();
      return kExitSuccess;
    }
  }
  const std::string command = chosen->get_name();
  try {
    if (!cfg.command.empty() && cfg.command != command) {
      throw ValidationError("config file is for command '" + cfg.command + "', not '" + command + "'");
    }
    cfg.command = command;
    cfg.use_cache = !no_cache;
    validate(cfg);
    for (int id : criteria) {
      if (id < 1 || id > kCriterionCount) throw ValidationError("criteria must lie in 1.." + std::to_string(kCriterionCount));
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::optional<ArtifactCache> cache;
  if (cfg.use_cache) cache.emplace(resolve_cache_dir(cfg), cfg.schema_version);
  Session session(std::move(cache), cfg.nodes);
  Context ctx{cfg, session, out, fs::path(cfg.out_dir)};

  try {
    json results;
    int code = kExitSuccess;
    if (command == "stationary") {
      results = cmd_stationary(ctx);
    } else if (command == "spectrum") {
      results = cmd_spectrum(ctx);
    } else if (command == "liouville") {
      results = cmd_liouville(ctx);
    } else if (command == "energy") {
      results = cmd_energy(ctx);
    } else if (command == "signtest") {
      results = cmd_signtest(ctx);
    } else if (command == "evolve") {
      results = cmd_evolve(ctx);
    } else if (command == "scan") {
      results = cmd_scan(ctx);
    } else if (command == "asymptotics") {
      results = cmd_asymptotics(ctx);
    } else {
      const auto report = run_verification(session, criteria);
      for (const auto& c : report.criteria) {
        out << (c.passed ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title << "\n";
        for (const auto& d : c.details) out << "    " << d << "\n";
        for (const auto& d : c.reported) out << "    (reported) " << d << "\n";
      }
      out << (report.all_passed() ? "all criteria passed" : "some criteria FAILED") << "\n";
      results = to_json(report);
      code = report.all_passed() ? kExitSuccess : kExitSolver;
    }
    const json summary = {{"command", command}, {"config", to_json(cfg)}, {"results", results}};
    write_json(ctx.dir / (command + "_summary.json"), summary);
    if (command != "verify") out << summary.dump(2) << "\n";
    return code;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NoConvergence& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace nodalheat::cli
