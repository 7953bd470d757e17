#pragma once

// JSON documents: scenario files (with geodetic origin and curriculum) and
// commander parameter files. Schemas are documented in docs/scenario.md.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "acsim/agents/trainer.hpp"
#include "acsim/dis/geo.hpp"

namespace acsim::agents {

struct ScenarioFile {
  combat::ScenarioConfig scenario;
  dis::Geodetic origin;  // anchors the local frame for DIS output
  std::vector<CurriculumStage> curriculum = default_curriculum();
};

// Every key is optional and defaults to ScenarioConfig{}; unknown keys, wrong
// types and invalid values throw ConfigError naming the key.
ScenarioFile scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioFile& file);

ScenarioFile load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioFile& file, const std::filesystem::path& path);

inline constexpr int kParamsVersion = 1;

// {"version": 1, "features": [...], "weights": {"attack": [6], ...}}
nlohmann::json to_json(const CommanderParams& params);
CommanderParams params_from_json(const nlohmann::json& doc);

CommanderParams load_params(const std::filesystem::path& path);
void save_params(const CommanderParams& params, const std::filesystem::path& path);

}  // namespace acsim::agents
