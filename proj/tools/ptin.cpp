// ptin: validate scenarios, run restoration strategies, run oracle suites.
//
// Exit status: 0 ok, 1 usage or I/O error, 2 invalid scenario, 3 infeasible
// run (no microgrid can form or an invariant broke), 4 oracle mismatch.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "ptin/report.hpp"
#include "ptin/restoration.hpp"
#include "ptin/scenario_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kInfeasible = 3;
constexpr int kMismatch = 4;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PTIN_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    std::cerr << "ignoring PTIN_SEED='" << v << "': not an unsigned integer\n";
    return std::nullopt;
  }
}

// Loads or reports. Returns the exit status on failure.
std::optional<ptin::Scenario> load(const std::string& path, std::optional<std::uint64_t> seed,
                                   int& status) {
  if (!std::filesystem::exists(path)) {
    std::cerr << "error: cannot open " << path << "\n";
    status = kUsage;
    return std::nullopt;
  }
  try {
    ptin::LoadOptions opt;
    opt.seed = seed;
    return ptin::load_scenario(path, opt);
  } catch (const ptin::ScenarioError& e) {
    for (const auto& issue : e.issues()) std::cerr << issue << "\n";
    status = kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    status = kUsage;
  }
  return std::nullopt;
}

int cmd_validate(const std::string& path) {
  int status = kOk;
  const auto s = load(path, std::nullopt, status);
  if (!s) return status;
  const auto issues = ptin::validate_scenario(*s);
  for (const auto& issue : issues) std::cout << issue << "\n";
  std::cout << path << ": " << issues.size() << " violation" << (issues.size() == 1 ? "" : "s")
            << "\n";
  return issues.empty() ? kOk : kInvalid;
}

struct RunArgs {
  std::string scenario;
  std::vector<std::string> strategies{"A1", "A2", "A3"};
  std::optional<std::uint64_t> seed;
  double horizon_s = 0.0;
  std::string out = "out";
  std::size_t node_budget = 0;
  std::size_t udssf_cap = 0;
  bool uav_persist = false;
};

int cmd_run(const RunArgs& args) {
  std::vector<ptin::restore::Strategy> strategies;
  for (const auto& name : args.strategies) {
    const auto st = ptin::restore::parse_strategy(name);
    if (!st) {
      std::cerr << "error: unknown strategy '" << name << "' (expected A1, A2 or A3)\n";
      return kUsage;
    }
    if (std::find(strategies.begin(), strategies.end(), *st) == strategies.end()) {
      strategies.push_back(*st);
    }
  }
  if (strategies.empty()) {
    std::cerr << "error: select at least one strategy\n";
    return kUsage;
  }
  if (args.horizon_s < 0.0) {
    std::cerr << "error: horizon must be positive\n";
    return kUsage;
  }
  int status = kOk;
  const auto seed = args.seed ? args.seed : env_seed();
  const auto s = load(args.scenario, seed, status);
  if (!s) return status;
  const auto issues = ptin::validate_scenario(*s);
  if (!issues.empty()) {
    for (const auto& issue : issues) std::cerr << issue << "\n";
    return kInvalid;
  }

  ptin::restore::RunOptions opt;
  opt.horizon_s = args.horizon_s;
  opt.routing_node_budget = args.node_budget;
  opt.udssf_cap = args.udssf_cap;
  opt.uav_persist = args.uav_persist;
  std::vector<ptin::restore::RunResult> runs;
  try {
    for (auto st : strategies) {
      runs.push_back(ptin::restore::run(*s, st, opt));
      for (const auto& path : ptin::report::write_run(args.out, *s, runs.back())) {
        std::cout << "wrote " << path.string() << "\n";
      }
    }
  } catch (const ptin::ScenarioError& e) {
    for (const auto& issue : e.issues()) std::cerr << issue << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::cout << ptin::report::comparison_table(runs);

  for (const auto& r : runs) {
    for (const auto& f : r.invariant_failures) {
      std::cerr << ptin::restore::strategy_name(r.strategy) << ": invariant broken: " << f << "\n";
      status = kInfeasible;
    }
    for (const auto& plan : r.plans) {
      for (const auto& d : plan.diagnostics) {
        std::cerr << ptin::restore::strategy_name(r.strategy) << ": " << d << "\n";
        if (d.find("no V2GS") != std::string::npos) status = kInfeasible;
      }
    }
    for (const auto& st : r.stages) {
      if (!st.routing_optimal) {
        std::cerr << ptin::restore::strategy_name(r.strategy) << ": stage " << st.stage
                  << " UAV routing hit the node budget; best found route used\n";
      }
    }
  }
  return status;
}

struct OracleArgs {
  std::string suite = "all";
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string scenario;
};

int cmd_oracle(const OracleArgs& args) {
  const std::vector<std::string> known{"dispatch", "routing", "connectivity", "radiality",
                                        "udssf"};
  std::vector<std::string> suites;
  if (args.suite == "all") {
    suites = known;
  } else if (std::find(known.begin(), known.end(), args.suite) != known.end()) {
    suites = {args.suite};
  } else {
    std::cerr << "error: unknown suite '" << args.suite << "'\n";
    return kUsage;
  }
  std::optional<ptin::Scenario> s;
  for (const auto& name : suites) {
    if ((name == "connectivity" || name == "radiality") && !s) {
      if (args.scenario.empty()) {
        std::cerr << "error: suite " << name << " needs --scenario\n";
        return kUsage;
      }
      int status = kOk;
      s = load(args.scenario, std::nullopt, status);
      if (!s) return status;
    }
  }
  bool all_pass = true;
  std::cout << "suite         matched/total  seconds  first counterexample\n";
  for (const auto& name : suites) {
    ptin::oracle::SuiteReport rep;
    auto n = [&](std::size_t dflt) { return args.count ? args.count : dflt; };
    if (name == "dispatch") rep = ptin::oracle::dispatch_suite(n(500), args.seed);
    if (name == "routing") rep = ptin::oracle::routing_suite(n(200), args.seed);
    if (name == "connectivity") rep = ptin::oracle::connectivity_suite(*s, n(200), args.seed);
    if (name == "radiality") rep = ptin::oracle::radiality_suite(*s, n(1000), args.seed);
    if (name == "udssf") rep = ptin::oracle::udssf_suite(n(100), args.seed);
    char line[128];
    std::snprintf(line, sizeof line, "%-13s %6zu/%-6zu  %7.3f  ", rep.name.c_str(), rep.matched,
                  rep.total, rep.seconds);
    std::cout << line << (rep.counterexample.empty() ? "-" : rep.counterexample) << "\n";
    all_pass = all_pass && rep.passed();
  }
  return all_pass ? kOk : kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled power/traffic/communication restoration simulator"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario,scenario", validate_path, "Scenario JSON")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run restoration strategies and write artifacts");
  run->add_option("--scenario", run_args.scenario, "Scenario JSON")->required();
  run->add_option("--strategy", run_args.strategies, "A1, A2 and/or A3")->delimiter(',');
  run->add_option("--seed", run_args.seed, "Participation seed (else PTIN_SEED, else scenario)");
  run->add_option("--horizon", run_args.horizon_s, "Simulated seconds (default: scenario)");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--routing-node-budget", run_args.node_budget, "UAV routing search node limit");
  run->add_option("--udssf-cap", run_args.udssf_cap, "Largest UAV site subset to search");
  run->add_flag("--uav-persist", run_args.uav_persist,
                "Keep UAVs on station as CN relays after their last workgroup");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Run brute-force equivalence suites");
  oracle->add_option("--suite", oracle_args.suite,
                     "dispatch, routing, connectivity, radiality, udssf or all");
  oracle->add_option("--count", oracle_args.count, "Instances per suite (default per suite)");
  oracle->add_option("--seed", oracle_args.seed, "Instance generator seed");
  oracle->add_option("--scenario", oracle_args.scenario,
                     "Scenario supplying the CN and PDN for connectivity/radiality");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*validate) return cmd_validate(validate_path);
  if (*run) return cmd_run(run_args);
  if (*oracle) return cmd_oracle(oracle_args);
  return kUsage;
}
