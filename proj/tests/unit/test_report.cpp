#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "ptin/report.hpp"

using namespace ptin;
using nlohmann::json;

namespace {

const restore::RunResult& toy_run() {
  static const auto r = restore::run(fx::build(fx::toy_feeder()), restore::Strategy::a3);
  return r;
}

}  // namespace

TEST_CASE("the curve has one row per second") {
  const auto& r = toy_run();
  const auto csv = report::curve_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "time_s,restored_kw");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == r.curve_kw.size());
}

TEST_CASE("summary fields agree with the run") {
  const auto s = fx::build(fx::toy_feeder());
  const auto& r = toy_run();
  const auto doc = json::parse(report::summary_json(s, r));
  CHECK(doc["strategy"] == "A3");
  CHECK(doc["final_restored_kw"].get<double>() == doctest::Approx(r.final_kw()));
  CHECK(doc["time_to_90_s"].get<double>() == r.time_to_fraction(0.9));
  CHECK(doc["executed_steps"].get<std::size_t>() == r.executed_steps());
  CHECK(doc["stages"].size() == r.stages.size());
}

TEST_CASE("every artifact is valid JSON and written deterministically") {
  const auto s = fx::build(fx::toy_feeder());
  const auto& r = toy_run();
  json doc;
  CHECK_NOTHROW(doc = json::parse(report::events_json(s, r)));
  CHECK_NOTHROW(doc = json::parse(report::uav_traces_json(r)));
  CHECK_NOTHROW(doc = json::parse(report::dispatch_json(r)));

  const auto dir = std::filesystem::temp_directory_path() / "ptin_report_test";
  std::filesystem::remove_all(dir);
  const auto paths = report::write_run(dir, s, r);
  CHECK(paths.size() == 5);
  for (const auto& p : paths) {
    CHECK(std::filesystem::exists(p));
    CHECK(p.filename().string().rfind("A3_", 0) == 0);
  }
  const auto first = read_text_file(paths[0]);
  report::write_run(dir, s, restore::run(s, restore::Strategy::a3));
  CHECK(read_text_file(paths[0]) == first);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the comparison table lists each strategy once") {
  const auto s = fx::build(fx::toy_feeder());
  std::vector<restore::RunResult> runs{restore::run(s, restore::Strategy::a1), toy_run()};
  const auto table = report::comparison_table(runs);
  CHECK(table.find("A1") != std::string::npos);
  CHECK(table.find("A3") != std::string::npos);
  CHECK(table.find("A2") == std::string::npos);
}
