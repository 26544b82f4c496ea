#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "nodalheat/cli/app.hpp"
#include "nodalheat/cli/cache.hpp"
#include "nodalheat/cli/config.hpp"
#include "nodalheat/cli/session.hpp"

using namespace nodalheat;
using namespace nodalheat::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("nodalheat-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(validate(RunConfig{})); }

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  RunConfig c;
  EXPECT_THROW(apply_json(c, json{{"bogus", 1}}), ValidationError);
  EXPECT_THROW(apply_json(c, json{{"p", "fifty"}}), ValidationError);
  EXPECT_THROW(apply_json(c, json{{"K", 2.5}}), ValidationError);
  EXPECT_THROW(apply_json(c, json{{"nodes", -5}}), ValidationError);
  EXPECT_THROW(apply_json(c, json{{"schema_version", 2}}), ValidationError);
  EXPECT_THROW(apply_json(c, json::array()), ValidationError);
}

TEST(Config, AppliesKnownKeys) {
  RunConfig c;
  apply_json(c, json{{"p", 75.5}, {"K", 3}, {"lambdas", {0.5, 2.0}}, {"t_max", 2.0}, {"evolution_nodes", 1001}});
  EXPECT_EQ(c.p, 75.5);
  EXPECT_EQ(c.K, 3);
  EXPECT_EQ(c.lambdas, (std::vector<double>{0.5, 2.0}));
  EXPECT_EQ(c.evolution.t_max, 2.0);
  EXPECT_EQ(c.evolution.grid_nodes, 1001u);
  // The echo reproduces the config.
  RunConfig d;
  apply_json(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
}

TEST(Config, ValidationNamesTheProblem) {
  auto expect_bad = [](auto mutate, const std::string& needle) {
    RunConfig c;
    mutate(c);
    try {
      validate(c);
      ADD_FAILURE() << "accepted config with bad " << needle;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_bad([](RunConfig& c) { c.p = 1.0; }, "p");
  expect_bad([](RunConfig& c) { c.K = 0; }, "K");
  expect_bad([](RunConfig& c) { c.R = 10.0; }, "R");
  expect_bad([](RunConfig& c) { c.p_list = {50.0, 20.0}; }, "p_list");
  expect_bad([](RunConfig& c) { c.evolution.blowup_threshold = 10.0; }, "blowup_threshold");
  expect_bad([](RunConfig& c) { c.lambda = std::nan(""); }, "lambda");
}

TEST(Config, CacheDirResolution) {
  RunConfig c;
  c.cache_dir = "/explicit";
  EXPECT_EQ(resolve_cache_dir(c), "/explicit");
  c.cache_dir.clear();
  ::setenv("NODALHEAT_CACHE_DIR", "/from-env", 1);
  EXPECT_EQ(resolve_cache_dir(c), "/from-env");
  ::unsetenv("NODALHEAT_CACHE_DIR");
  EXPECT_EQ(resolve_cache_dir(c), ".nodalheat-cache");
}

TEST(Cache, SolutionRoundTripIsExact) {
  TempDir dir;
  const ArtifactCache cache(dir.path());
  const auto sol = stationary_solution(50.0, 2);
  const auto layout = ArtifactCache::auto_layout(kDefaultSolutionNodes);
  EXPECT_FALSE(cache.load_solution(50.0, 2, layout).has_value());
  cache.store_solution(sol, layout);
  const auto back = cache.load_solution(50.0, 2, layout);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->values, sol.values);
  EXPECT_EQ(back->nodal_radii, sol.nodal_radii);
  EXPECT_EQ(back->amplitude, sol.amplitude);
  EXPECT_EQ(back->epsilon, sol.epsilon);
  EXPECT_EQ(back->log_epsilon, sol.log_epsilon);
  EXPECT_EQ(back->grid, sol.grid);
}

TEST(Cache, EigenpairRoundTripIsExact) {
  TempDir dir;
  const ArtifactCache cache(dir.path());
  const auto pair = limit_eigenpair(20.0, 801);
  const auto key = ArtifactCache::limit_key(pair.grid, cache.schema_version());
  cache.store_eigenpair(key, pair);
  const auto back = cache.load_eigenpair(key);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->eigenvalue, pair.eigenvalue);
  EXPECT_EQ(back->eigenfunction, pair.eigenfunction);
  EXPECT_EQ(back->residual, pair.residual);
}

TEST(Cache, SchemaBumpForcesMiss) {
  TempDir dir;
  const auto sol = stationary_solution(20.0, 1, 201);
  const std::string layout = ArtifactCache::auto_layout(201);
  ArtifactCache(dir.path(), 1).store_solution(sol, layout);
  EXPECT_TRUE(ArtifactCache(dir.path(), 1).load_solution(20.0, 1, layout).has_value());
  EXPECT_FALSE(ArtifactCache(dir.path(), 2).load_solution(20.0, 1, layout).has_value());
}

TEST(Cache, DifferentKeysNeverHit) {
  TempDir dir;
  const ArtifactCache cache(dir.path());
  const auto sol = stationary_solution(20.0, 1, 201);
  cache.store_solution(sol, ArtifactCache::auto_layout(201));
  EXPECT_FALSE(cache.load_solution(20.0, 2, ArtifactCache::auto_layout(201)).has_value());
  EXPECT_FALSE(cache.load_solution(20.5, 1, ArtifactCache::auto_layout(201)).has_value());
  EXPECT_FALSE(cache.load_solution(20.0, 1, ArtifactCache::auto_layout(203)).has_value());

  // Planting the file under another key's name must still miss.
  const auto stored = cache.path_for(ArtifactCache::solution_key(20.0, 1, ArtifactCache::auto_layout(201), 1));
  const auto other = cache.path_for(ArtifactCache::solution_key(30.0, 1, ArtifactCache::auto_layout(201), 1));
  fs::copy_file(stored, other);
  EXPECT_FALSE(cache.load_solution(30.0, 1, ArtifactCache::auto_layout(201)).has_value());
}

TEST(Cache, CorruptFileIsAMissWithWarning) {
  TempDir dir;
  const ArtifactCache cache(dir.path());
  const std::string layout = ArtifactCache::auto_layout(201);
  cache.store_solution(stationary_solution(20.0, 1, 201), layout);
  const auto path = cache.path_for(ArtifactCache::solution_key(20.0, 1, layout, 1));
  std::ofstream(path, std::ios::trunc) << "{\"key\": {\"kind\": \"sol";
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const auto loaded = cache.load_solution(20.0, 1, layout);
  std::cerr.rdbuf(old);
  EXPECT_FALSE(loaded.has_value());
  EXPECT_NE(captured.str().find("warning"), std::string::npos) << captured.str();
}

TEST(Cache, ConcurrentWritersToDistinctKeys) {
  TempDir dir;
  const ArtifactCache cache(dir.path());
  const std::string layout = ArtifactCache::auto_layout(301);
  const std::vector<double> ps{3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0};
  std::vector<std::thread> writers;
  for (double p : ps) {
    writers.emplace_back([&, p] {
      const auto sol = stationary_solution(p, 2, 301);
      for (int k = 0; k < 5; ++k) cache.store_solution(sol, layout);
    });
  }
  for (auto& t : writers) t.join();
  for (double p : ps) {
    const auto back = cache.load_solution(p, 2, layout);
    ASSERT_TRUE(back.has_value()) << "p = " << p;
    EXPECT_EQ(back->p, p);
  }
  for (const auto& entry : fs::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().extension(), ".json") << "leftover temp file " << entry.path();
  }
}

TEST(Cache, KeyDigestIsStable) {
  const auto a = ArtifactCache::solution_key(50.0, 2, "x", 1);
  EXPECT_EQ(a.digest(), ArtifactCache::solution_key(50.0, 2, "x", 1).digest());
  EXPECT_NE(a.digest(), ArtifactCache::solution_key(50.0, 3, "x", 1).digest());
  EXPECT_EQ(a.digest().size(), 16u);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(SessionCache, SecondSessionLoadsInsteadOfComputing) {
  TempDir dir;
  {
    Session s(ArtifactCache(dir.path()), 2001);
    (void)s.eigenpair(30.0, 2);
    EXPECT_EQ(s.computed_count(), 2u);
  }
  Session s(ArtifactCache(dir.path()), 2001);
  const auto& pair = s.eigenpair(30.0, 2);
  EXPECT_EQ(s.computed_count(), 0u);
  EXPECT_LT(pair.eigenvalue, 0.0);
}

TEST(Run, HelpAndParseErrors) {
  EXPECT_EQ(invoke({"--help"}).code, kExitSuccess);
  EXPECT_EQ(invoke({"stationary", "--help"}).code, kExitSuccess);
  EXPECT_EQ(invoke({}).code, kExitValidation);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(invoke({"stationary", "--p", "abc"}).code, kExitValidation);
  EXPECT_EQ(invoke({"stationary", "--unknown-flag"}).code, kExitValidation);
}

TEST(Run, ValidationErrorsExitOne) {
  TempDir dir;
  const auto r = invoke({"stationary", "--p", "0.5", "--out", dir.str(), "--no-cache"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("p must"), std::string::npos);
  EXPECT_EQ(invoke({"spectrum", "--limit", "--R", "5", "--no-cache", "--out", dir.str()}).code, kExitValidation);
  EXPECT_EQ(invoke({"verify", "--criteria", "12", "--no-cache", "--out", dir.str()}).code, kExitValidation);
  EXPECT_EQ(invoke({"asymptotics", "--p-list", "50,20", "--no-cache", "--out", dir.str()}).code, kExitValidation);
}

TEST(Run, SolverFailureExitsTwo) {
  TempDir dir;
  // Twenty thousand nodal zones exhaust the step budget of the shooting.
  const auto r = invoke({"stationary", "--p", "3", "--K", "20000", "--out", dir.str(), "--no-cache"});
  EXPECT_EQ(r.code, kExitSolver) << r.err;
}

TEST(Run, ConfigFileWithOverrides) {
  TempDir dir;
  const auto cfg = dir.path() / "run.json";
  std::ofstream(cfg) << json{{"command", "energy"}, {"p", 20.0}, {"K", 1}, {"nodes", 2001}}.dump();
  const auto r = invoke({"energy", "--config", cfg.string(), "--K", "2", "--out", dir.str(), "--no-cache"});
  ASSERT_EQ(r.code, kExitSuccess) << r.err;
  const auto summary = read_json(dir.path() / "energy_summary.json");
  EXPECT_EQ(summary["config"]["p"], 20.0);
  EXPECT_EQ(summary["config"]["K"], 2);
  EXPECT_EQ(summary["config"]["nodes"], 2001);
  EXPECT_LE(std::fabs(summary["results"]["nehari_relative"].get<double>()), 1e-6);

  EXPECT_EQ(invoke({"stationary", "--config", cfg.string(), "--no-cache", "--out", dir.str()}).code, kExitValidation);
  std::ofstream(cfg, std::ios::trunc) << "{\"p\": 20, \"typo\": 1}";
  EXPECT_EQ(invoke({"energy", "--config", cfg.string(), "--no-cache", "--out", dir.str()}).code, kExitValidation);
}

TEST(Run, LimitSpectrumIsNegative) {
  TempDir dir;
  const auto r = invoke({"spectrum", "--limit", "--R", "40", "--out", dir.str(), "--no-cache"});
  ASSERT_EQ(r.code, kExitSuccess) << r.err;
  const auto summary = read_json(dir.path() / "spectrum_summary.json");
  EXPECT_LT(summary["results"]["eigenvalue"].get<double>(), 0.0);
  EXPECT_EQ(json::parse(r.out), summary);
  EXPECT_TRUE(fs::exists(dir.path() / "spectrum_limit_eigenfunction.csv"));
}

TEST(Run, SignTestAtLargePIsPositive) {
  TempDir dir;
  const auto r = invoke({"signtest", "--p", "200", "--K", "2", "--out", dir.str(), "--cache-dir", (dir.path() / "c").string()});
  ASSERT_EQ(r.code, kExitSuccess) << r.err;
  const auto summary = read_json(dir.path() / "signtest_summary.json");
  EXPECT_GT(summary["results"]["integral_u_phi"].get<double>(), 0.0);
  EXPECT_EQ(summary["command"], "signtest");
  EXPECT_EQ(summary["config"]["p"], 200.0);
}

TEST(Run, EvolveAndScanWriteTraces) {
  TempDir dir;
  const std::vector<std::string> common{"--p", "30", "--K", "2", "--evolution-nodes", "2001", "--out", dir.str(), "--no-cache"};
  auto args = std::vector<std::string>{"evolve", "--lambda", "3"};
  args.insert(args.end(), common.begin(), common.end());
  auto r = invoke(args);
  ASSERT_EQ(r.code, kExitSuccess) << r.err;
  EXPECT_EQ(read_json(dir.path() / "evolve_summary.json")["results"]["classification"], "Blowup");
  EXPECT_EQ(slurp(dir.path() / "evolve_trace.csv").rfind("t,sup_norm\n", 0), 0u);

  args = {"scan", "--lambdas", "0.1,3"};
  args.insert(args.end(), common.begin(), common.end());
  r = invoke(args);
  ASSERT_EQ(r.code, kExitSuccess) << r.err;
  const auto outcomes = read_json(dir.path() / "scan_summary.json")["results"]["outcomes"];
  ASSERT_EQ(outcomes.size(), 2u);
  EXPECT_EQ(outcomes[0]["classification"], "GlobalDecay");
  EXPECT_EQ(outcomes[1]["classification"], "Blowup");
}

TEST(Run, ProfileCsvIsDeterministic) {
  TempDir a, b;
  for (const auto* d : {&a, &b}) {
    ASSERT_EQ(invoke({"liouville", "--p", "50", "--K", "2", "--nodes", "4001", "--out", d->str(), "--no-cache"}).code,
              kExitSuccess);
  }
  EXPECT_EQ(slurp(a.path() / "liouville_profile.csv"), slurp(b.path() / "liouville_profile.csv"));
  EXPECT_EQ(read_json(a.path() / "liouville_summary.json")["results"], read_json(b.path() / "liouville_summary.json")["results"]);
}

TEST(Run, CachedRunMatchesFreshRun) {
  TempDir fresh, cached, cache_dir;
  const std::vector<std::string> base{"stationary", "--p", "40", "--K", "3", "--nodes", "4001", "--cache-dir", cache_dir.str()};
  for (const auto* d : {&fresh, &cached}) {
    auto args = base;
    args.insert(args.end(), {"--out", d->str()});
    ASSERT_EQ(invoke(args).code, kExitSuccess);
  }
  EXPECT_EQ(slurp(fresh.path() / "stationary_profile.csv"), slurp(cached.path() / "stationary_profile.csv"));
}

TEST(Run, VerifySubsetPrintsVerdicts) {
  TempDir dir;
  const auto r = invoke({"verify", "--criteria", "1,4", "--out", dir.str(), "--cache-dir", (dir.path() / "c").string()});
  EXPECT_EQ(r.code, kExitSuccess) << r.out;
  EXPECT_NE(r.out.find("[PASS] criterion 1:"), std::string::npos);
  EXPECT_NE(r.out.find("[PASS] criterion 4:"), std::string::npos);
  EXPECT_EQ(r.out.find("criterion 2:"), std::string::npos);
  const auto summary = read_json(dir.path() / "verify_summary.json");
  EXPECT_EQ(summary["results"]["criteria"].size(), 2u);
}
