#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "flashopt/models/world_state.hpp"

namespace flashopt::models {

// Initial on-chain state plus the entity whose balance the attack vectors
// track.
struct Scenario {
  std::string name;
  EntityId adversary;
  WorldState state;
};

// Pool stanzas use the symbol names of the model: vX, cf, er, zY, uX, uY, ocr,
// leverage, wX, pm, lr, minP, maxP, kX, maxY.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);

// Reads a whole file, throwing ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

// Bundled reference scenarios under data/scenarios.
std::filesystem::path data_dir();
Scenario bundled_scenario(const std::string& name);

}  // namespace flashopt::models
