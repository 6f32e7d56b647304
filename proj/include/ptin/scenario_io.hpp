#pragma once

// Scenario documents (JSON). Loading resolves every cross reference, derives
// coupled quantities and computes the pre-damage energization/comm state;
// the damage set is kept on the scenario and applied by apply_damage.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptin/model.hpp"

namespace ptin {

struct LoadOptions {
  std::optional<std::uint64_t> seed;  // overrides params.seed for the participation draw
};

// Throws ScenarioError. Parse errors carry "line L, column C"; field errors
// carry the JSON path of the offending value.
Scenario parse_scenario(std::string_view text, const LoadOptions& options = {});
Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options = {});

// Writes every field explicitly so that parsing the output reproduces an
// identical Scenario.
std::string serialize_scenario(const Scenario& s);

// Structural and type invariants of a linked scenario; one line per problem.
std::vector<std::string> validate_scenario(const Scenario& s);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ptin
