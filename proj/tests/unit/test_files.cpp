#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../common/support.hpp"
#include "acsim/agents/files.hpp"

using namespace acsim;
using namespace acsim::agents;
using nlohmann::json;

namespace {

// Runs `parse` and returns the ConfigError message, or "" if none was thrown.
template <typename F>
std::string config_error(F parse) {
  try {
    parse();
  } catch (const combat::ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "acsim_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("files") {

TEST_CASE("an empty scenario document gives the defaults") {
  const ScenarioFile f = scenario_from_json(json::object());
  CHECK(f.scenario == combat::ScenarioConfig{});
  CHECK(f.curriculum == default_curriculum());
}

TEST_CASE("scenario files round trip through JSON and disk") {
  ScenarioFile f;
  f.scenario.blue_count = 4;
  f.scenario.red_count = 3;
  f.scenario.time_limit = 240.5;
  f.scenario.seed = 0xfedcba9876543210ull;
  f.scenario.curriculum_stage = 1;
  f.scenario.human_slots = {2, 1};
  f.scenario.spawn.facing = combat::Facing::kRandom;
  f.scenario.spawn.red.altitude_max = 7500.0;
  f.scenario.rules.hit_probability = 0.5;
  f.origin = dis::geodetic_from_degrees(-33.9, 18.4, 120.0);
  f.curriculum = {{0, 1, 1, OpponentSpec::fixed_policy(PolicyKind::kEngage), 0.8, 50},
                  {3, 2, 2, OpponentSpec::mixed({{0.2, 0.3, 0.5}}), 0.6, 10},
                  {4, 3, 3, OpponentSpec::self_play(), 0.55, 20}};

  const json doc = to_json(f);
  const ScenarioFile back = scenario_from_json(doc);
  CHECK(to_json(back) == doc);
  CHECK(back.scenario.seed == f.scenario.seed);
  CHECK(back.scenario.human_slots == f.scenario.human_slots);
  CHECK(back.scenario.spawn == f.scenario.spawn);
  CHECK(back.scenario.rules.gun_cone == doctest::Approx(f.scenario.rules.gun_cone));
  CHECK(back.curriculum == f.curriculum);
  CHECK(back.origin.latitude == doctest::Approx(f.origin.latitude));
  CHECK(back.origin.longitude == doctest::Approx(f.origin.longitude));

  const auto path = scratch("roundtrip.json");
  save_scenario(f, path);
  CHECK(to_json(load_scenario(path)) == doc);
}

TEST_CASE("scenario errors name the offending key") {
  CHECK(config_error([] { scenario_from_json({{"blu", 2}}); }).find("blu") != std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"blue", "two"}}); }).find("blue") != std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"blue", 2.5}}); }).find("blue") != std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"time_limit", "long"}}); }).find("time_limit") !=
        std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"spawn", {{"blue", {{"radus", 1.0}}}}}}); })
            .find("spawn.blue.radus") != std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"spawn", {{"facing", "north"}}}}); }).find("spawn.facing") !=
        std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"rules", {{"substeps", true}}}}); }).find("rules.substeps") !=
        std::string::npos);
  CHECK(config_error([] { scenario_from_json({{"origin", {{"lat_deg", 95.0}}}}); }).find("origin.lat_deg") !=
        std::string::npos);
  CHECK(config_error([] {
          scenario_from_json({{"curriculum", json::array({{{"opponent", "pacifist"}}})}});
        }).find("curriculum[0].opponent") != std::string::npos);
  CHECK(config_error([] {
          scenario_from_json({{"curriculum", json::array({{{"opponent", {{"mixed", {0.5, 0.6, 0.0}}}}}})}});
        }).find("curriculum[0].opponent") != std::string::npos);
  CHECK_FALSE(config_error([] { scenario_from_json(json::array()); }).empty());
  CHECK_FALSE(config_error([] { scenario_from_json({{"blue", 11}}); }).empty());
  CHECK_FALSE(config_error([] { scenario_from_json({{"time_limit", -5}}); }).empty());
  CHECK_FALSE(config_error([] { scenario_from_json({{"seed", -1}}); }).empty());
  CHECK_FALSE(config_error([] { load_scenario(scratch("missing.json")); }).empty());
}

TEST_CASE("a file that is not JSON is a configuration error") {
  const auto path = scratch("garbage.json");
  {
    std::ofstream out(path);
    out << "{\"blue\": 2,";
  }
  CHECK(config_error([&] { load_scenario(path); }).find(path.string()) != std::string::npos);
}

TEST_CASE("the shipped scenarios load") {
  for (const auto& [name, m] : std::vector<std::pair<std::string, int>>{{"1v1", 1}, {"2v2", 2}, {"10v10", 10}}) {
    CAPTURE(name);
    const ScenarioFile f = load_scenario(test::source_path("scenarios/" + name + ".json"));
    CHECK(f.scenario.blue_count == m);
    CHECK(f.scenario.red_count == m);
    CHECK_NOTHROW(combat::reset(f.scenario));
  }
}

TEST_CASE("commander params round trip exactly") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  CommanderParams p;
  for (auto& row : p.weights) {
    for (auto& w : row) w = n(rng);
  }
  const json doc = to_json(p);
  CHECK(doc["version"] == kParamsVersion);
  CHECK(doc["features"] ==
        json({"hp", "threat_range", "threat_aspect", "numerical_advantage", "energy", "bias"}));
  CHECK(params_from_json(doc) == p);
  const auto path = scratch("params.json");
  save_params(p, path);
  CHECK(load_params(path) == p);
}

TEST_CASE("params errors") {
  const json good = to_json(rule_commander_params());
  auto broken = [&](auto mutate) {
    json doc = good;
    mutate(doc);
    return config_error([&] { params_from_json(doc); });
  };
  CHECK(broken([](json& d) { d["version"] = 2; }).find("params.version") != std::string::npos);
  CHECK(broken([](json& d) { d.erase("version"); }).find("params.version") != std::string::npos);
  CHECK(broken([](json& d) { d["features"][0] = "health"; }).find("params.features") != std::string::npos);
  CHECK(broken([](json& d) { d["weights"].erase("engage"); }).find("params.weights.engage") !=
        std::string::npos);
  CHECK(broken([](json& d) { d["weights"]["attack"].push_back(1.0); }).find("params.weights.attack") !=
        std::string::npos);
  CHECK(broken([](json& d) { d["weights"]["defend"][2] = "x"; }).find("params.weights.defend") !=
        std::string::npos);
  CHECK(broken([](json& d) { d["extra"] = 1; }).find("extra") != std::string::npos);
}

}  // TEST_SUITE
