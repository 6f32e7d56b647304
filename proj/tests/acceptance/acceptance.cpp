// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// usage: ptin_acceptance [scenario.json]   (default: the bundled case)

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ptin/report.hpp"
#include "ptin/restoration.hpp"
#include "ptin/scenario_io.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using ptin::restore::RunResult;
using ptin::restore::Strategy;

constexpr std::uint64_t kSeed = 1;
constexpr double kTol = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const Outcome& o, double seconds, double limit_s) {
  const bool in_time = seconds < limit_s;
  const bool pass = o.pass && in_time;
  failures += pass ? 0 : 1;
  std::printf("%s  %-22s %7.3f s (limit %.0f s)  %s%s\n", pass ? "PASS" : "FAIL", name, seconds,
              limit_s, o.detail.c_str(), in_time ? "" : " [over time limit]");
  std::fflush(stdout);
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome from_suite(const ptin::oracle::SuiteReport& rep, std::size_t expected) {
  Outcome o;
  o.pass = rep.passed() && rep.total == expected;
  o.detail = std::to_string(rep.matched) + "/" + std::to_string(rep.total) + " matched";
  if (!rep.counterexample.empty()) o.detail += "; first mismatch: " + rep.counterexample;
  return o;
}

void suite(const char* name, double limit_s, std::size_t count,
           const std::function<ptin::oracle::SuiteReport()>& fn) {
  const auto t0 = Clock::now();
  const auto rep = fn();
  report(name, from_suite(rep, count), since(t0), limit_s);
}

std::string artifacts(const ptin::Scenario& s, const RunResult& r) {
  namespace rp = ptin::report;
  return rp::events_json(s, r) + rp::curve_csv(r) + rp::uav_traces_json(r) + rp::dispatch_json(r) +
         rp::summary_json(s, r);
}

std::string fmt(const char* f, double a, double b, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path path = argc > 1 ? argv[1] : PTIN_CASE_FILE;
  ptin::Scenario s;
  try {
    s = ptin::load_scenario(path);
  } catch (const ptin::ScenarioError& e) {
    for (const auto& issue : e.issues()) std::fprintf(stderr, "%s\n", issue.c_str());
    return 2;
  }

  suite("dispatch-oracle", 10.0, 500, [] { return ptin::oracle::dispatch_suite(500, kSeed); });
  suite("routing-oracle", 60.0, 200, [] { return ptin::oracle::routing_suite(200, kSeed); });
  suite("connectivity-oracle", 5.0, 200,
        [&] { return ptin::oracle::connectivity_suite(s, 200, kSeed); });

  // The three-strategy run feeds the radiality, reproduction and
  // monotonicity criteria.
  const auto t_run = Clock::now();
  std::vector<RunResult> runs;
  for (auto st : {Strategy::a1, Strategy::a2, Strategy::a3}) runs.push_back(ptin::restore::run(s, st));
  const double run_s = since(t_run);
  const auto& a1 = runs[0];
  const auto& a2 = runs[1];
  const auto& a3 = runs[2];

  {
    const auto t0 = Clock::now();
    const auto rep = ptin::oracle::radiality_suite(s, 1000, kSeed);
    auto o = from_suite(rep, 1000);
    std::size_t inline_failures = 0;
    std::string first;
    for (const auto& r : runs) {
      inline_failures += r.invariant_failures.size();
      if (first.empty() && !r.invariant_failures.empty()) first = r.invariant_failures.front();
    }
    o.pass = o.pass && inline_failures == 0;
    o.detail += "; " + std::to_string(inline_failures) + " inline invariant failures";
    if (!first.empty()) o.detail += " (" + first + ")";
    report("radiality", o, since(t0), 5.0);
  }

  suite("udssf-minimality", 30.0, 100, [] { return ptin::oracle::udssf_suite(100, kSeed); });

  {
    Outcome o;
    const bool order = a3.final_kw() + kTol >= a2.final_kw() && a2.final_kw() + kTol >= a1.final_kw();
    const bool facilities = a3.facility_fraction_before_stage2 >= 1.0 - kTol;
    const double t90_a3 = a3.time_to_fraction(0.9);
    const double t90_a2 = a2.time_to_fraction(0.9);
    const bool speed = t90_a3 <= t90_a2;
    o.pass = order && facilities && speed;
    o.detail = fmt("final A1/A2/A3 %.1f/%.1f/%.1f kW", a1.final_kw(), a2.final_kw(), a3.final_kw()) +
               fmt("; A3 facilities before stage 2 %.1f%%; t90 A3 %.0f s",
                   100.0 * a3.facility_fraction_before_stage2, t90_a3) +
               fmt(" vs A2 %.0f s", t90_a2, 0.0);
    report("chained-recovery", o, run_s, 300.0);
  }

  {
    const auto t0 = Clock::now();
    Outcome o;
    std::size_t ev_drops = 0;
    std::size_t limit_drops = 0;
    for (std::size_t k = 1; k < a3.dispatchable_trace.size(); ++k) {
      ev_drops += a3.dispatchable_trace[k].second < a3.dispatchable_trace[k - 1].second;
    }
    for (std::size_t k = 1; k < a3.lane_limit_trace.size(); ++k) {
      const auto& prev = a3.lane_limit_trace[k - 1];
      const auto& cur = a3.lane_limit_trace[k];
      for (std::size_t l = 0; l < cur.size() && l < prev.size(); ++l) limit_drops += cur[l] < prev[l];
    }
    const std::size_t samples = a3.dispatchable_trace.size();
    o.pass = samples > 1 && ev_drops == 0 && limit_drops == 0;
    o.detail = std::to_string(samples) + " stage-1 samples; " + std::to_string(ev_drops) +
               " dispatchable-EV drops, " + std::to_string(limit_drops) + " lane-limit drops";
    report("monotonicity", o, since(t0), 5.0);
  }

  {
    const auto t0 = Clock::now();
    Outcome o;
    o.pass = true;
    std::size_t bytes = 0;
    // Reload so the seeded participation draw is repeated too.
    const auto fresh = ptin::load_scenario(path);
    for (const auto& first : runs) {
      const auto again = ptin::restore::run(fresh, first.strategy);
      const auto x = artifacts(s, first);
      const auto y = artifacts(s, again);
      bytes += x.size();
      if (x != y) {
        o.pass = false;
        o.detail += std::string(ptin::restore::strategy_name(first.strategy)) + " differs; ";
      }
    }
    o.detail += std::to_string(bytes) + " bytes compared over 3 strategies";
    report("determinism", o, since(t0), 300.0);
  }

  return failures == 0 ? 0 : 1;
}
