#include "acsim/agents/files.hpp"

#include <fstream>
#include <set>

namespace acsim::agents {

using nlohmann::json;
using combat::ConfigError;

namespace {

// Reads keys from one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(name() + ": expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else {
        const auto i = v->get<std::int64_t>();
        if constexpr (std::is_unsigned_v<Int>) {
          if (i < 0) throw ConfigError(key_path(key) + ": must be >= 0");
        }
        out = static_cast<Int>(i);
      }
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

 private:
  std::string name() const { return path_.empty() ? "scenario" : path_; }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_volume(ObjectReader& parent, const std::string& key, combat::SpawnVolume& v) {
  const json* doc = parent.find(key);
  if (!doc) return;
  ObjectReader r(*doc, parent.key_path(key));
  r.number("north", v.north);
  r.number("east", v.east);
  r.number("radius", v.radius);
  r.number("altitude_min", v.altitude_min);
  r.number("altitude_max", v.altitude_max);
  r.finish();
}

json volume_json(const combat::SpawnVolume& v) {
  return {{"north", v.north},
          {"east", v.east},
          {"radius", v.radius},
          {"altitude_min", v.altitude_min},
          {"altitude_max", v.altitude_max}};
}

MixedStrategy read_mix(const json& doc, const std::string& path) {
  if (!doc.is_array() || doc.size() != combat::kPolicyCount) {
    throw ConfigError(path + ": expected [attack, engage, defend] weights");
  }
  MixedStrategy m;
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    if (!doc[k].is_number()) throw ConfigError(path + ": weights must be numbers");
    m.weights[k] = doc[k].get<double>();
  }
  if (!m.valid()) throw ConfigError(path + ": weights must be >= 0 and sum to 1");
  return m;
}

// "attack" | "engage" | "defend" | "mixed" | "self_play" | {"mixed": [a, e, d]}
OpponentSpec read_opponent(const json& doc, const std::string& path) {
  if (doc.is_string()) {
    const auto text = doc.get<std::string>();
    if (text == "mixed") return OpponentSpec::mixed();
    if (text == "self_play") return OpponentSpec::self_play();
    if (const auto k = combat::parse_policy(text)) return OpponentSpec::fixed_policy(*k);
    throw ConfigError(path + ": unknown opponent '" + text + "'");
  }
  if (doc.is_object() && doc.size() == 1 && doc.contains("mixed")) {
    return OpponentSpec::mixed(read_mix(doc["mixed"], path + ".mixed"));
  }
  throw ConfigError(path + ": expected an opponent name or {\"mixed\": [...]}");
}

json opponent_json(const OpponentSpec& o) {
  switch (o.kind) {
    case OpponentSpec::Kind::kFixed: return std::string(combat::to_string(o.fixed));
    case OpponentSpec::Kind::kSelfPlay: return "self_play";
    case OpponentSpec::Kind::kMixed:
      if (o.mix == kReferenceMix) return "mixed";
      return json{{"mixed", o.mix.weights}};
  }
  return "mixed";
}

std::vector<double> params_row(const json& doc, const std::string& path) {
  if (!doc.is_array() || doc.size() != kInputCount) {
    throw ConfigError(path + ": expected " + std::to_string(kInputCount) + " numbers");
  }
  std::vector<double> row;
  for (const auto& v : doc) {
    if (!v.is_number()) throw ConfigError(path + ": expected numbers");
    row.push_back(v.get<double>());
  }
  return row;
}

const char* const kFeatureNames[kInputCount] = {"hp",     "threat_range", "threat_aspect",
                                                "numerical_advantage", "energy", "bias"};

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_file(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace

ScenarioFile scenario_from_json(const json& doc) {
  ScenarioFile file;
  auto& c = file.scenario;
  ObjectReader r(doc, "");
  r.integer("blue", c.blue_count);
  r.integer("red", c.red_count);
  r.number("time_limit", c.time_limit);
  r.integer("seed", c.seed);
  r.integer("curriculum_stage", c.curriculum_stage);

  if (const json* slots = r.find("human_slots")) {
    ObjectReader s(*slots, "human_slots");
    s.integer("blue", c.human_slots.blue);
    s.integer("red", c.human_slots.red);
    s.finish();
  }

  if (const json* spawn = r.find("spawn")) {
    ObjectReader s(*spawn, "spawn");
    read_volume(s, "blue", c.spawn.blue);
    read_volume(s, "red", c.spawn.red);
    s.number("speed_min", c.spawn.speed_min);
    s.number("speed_max", c.spawn.speed_max);
    std::string facing = c.spawn.facing == combat::Facing::kRandom ? "random" : "toward_enemy";
    s.string("facing", facing);
    if (facing == "toward_enemy") {
      c.spawn.facing = combat::Facing::kTowardEnemy;
    } else if (facing == "random") {
      c.spawn.facing = combat::Facing::kRandom;
    } else {
      throw ConfigError("spawn.facing: expected toward_enemy or random");
    }
    s.finish();
  }

  if (const json* rules = r.find("rules")) {
    ObjectReader s(*rules, "rules");
    s.number("hit_probability", c.rules.hit_probability);
    s.number("gun_range", c.rules.gun_range);
    double cone_deg = rad_to_deg(c.rules.gun_cone);
    s.number("gun_cone_deg", cone_deg);
    c.rules.gun_cone = deg_to_rad(cone_deg);
    s.number("gun_cooldown", c.rules.gun_cooldown);
    s.number("decision_dt", c.rules.decision_dt);
    s.integer("substeps", c.rules.substeps);
    s.finish();
  }

  if (const json* origin = r.find("origin")) {
    ObjectReader s(*origin, "origin");
    double lat = 0.0, lon = 0.0, alt = 0.0;
    s.number("lat_deg", lat);
    s.number("lon_deg", lon);
    s.number("alt_m", alt);
    s.finish();
    if (!(lat >= -90.0 && lat <= 90.0)) throw ConfigError("origin.lat_deg: must lie in [-90, 90]");
    if (!std::isfinite(lon) || !std::isfinite(alt)) throw ConfigError("origin: must be finite");
    file.origin = dis::geodetic_from_degrees(lat, lon, alt);
  }

  if (const json* stages = r.find("curriculum")) {
    if (!stages->is_array()) throw ConfigError("curriculum: expected an array");
    file.curriculum.clear();
    for (std::size_t i = 0; i < stages->size(); ++i) {
      const std::string path = "curriculum[" + std::to_string(i) + "]";
      ObjectReader s((*stages)[i], path);
      CurriculumStage stage;
      stage.id = static_cast<int>(i);
      s.integer("id", stage.id);
      s.integer("blue", stage.blue_count);
      s.integer("red", stage.red_count);
      if (const json* opp = s.find("opponent")) stage.opponent = read_opponent(*opp, path + ".opponent");
      s.number("threshold", stage.threshold);
      s.integer("window", stage.window);
      s.finish();
      file.curriculum.push_back(stage);
    }
    validate_curriculum(file.curriculum);
  }
  r.finish();

  combat::validate(c);
  return file;
}

json to_json(const ScenarioFile& file) {
  const auto& c = file.scenario;
  json stages = json::array();
  for (const auto& s : file.curriculum) {
    stages.push_back({{"id", s.id},
                      {"blue", s.blue_count},
                      {"red", s.red_count},
                      {"opponent", opponent_json(s.opponent)},
                      {"threshold", s.threshold},
                      {"window", s.window}});
  }
  return {
      {"blue", c.blue_count},
      {"red", c.red_count},
      {"time_limit", c.time_limit},
      {"seed", c.seed},
      {"curriculum_stage", c.curriculum_stage},
      {"human_slots", {{"blue", c.human_slots.blue}, {"red", c.human_slots.red}}},
      {"spawn",
       {{"blue", volume_json(c.spawn.blue)},
        {"red", volume_json(c.spawn.red)},
        {"speed_min", c.spawn.speed_min},
        {"speed_max", c.spawn.speed_max},
        {"facing", c.spawn.facing == combat::Facing::kRandom ? "random" : "toward_enemy"}}},
      {"rules",
       {{"hit_probability", c.rules.hit_probability},
        {"gun_range", c.rules.gun_range},
        {"gun_cone_deg", rad_to_deg(c.rules.gun_cone)},
        {"gun_cooldown", c.rules.gun_cooldown},
        {"decision_dt", c.rules.decision_dt},
        {"substeps", c.rules.substeps}}},
      {"origin",
       {{"lat_deg", rad_to_deg(file.origin.latitude)},
        {"lon_deg", rad_to_deg(file.origin.longitude)},
        {"alt_m", file.origin.altitude}}},
      {"curriculum", stages},
  };
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  const json doc = read_file(path);
  try {
    return scenario_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_scenario(const ScenarioFile& file, const std::filesystem::path& path) {
  write_file(to_json(file), path);
}

json to_json(const CommanderParams& params) {
  json weights = json::object();
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    const auto kind = static_cast<PolicyKind>(k);
    weights[std::string(combat::to_string(kind))] = params.weights[k];
  }
  return {{"version", params.version},
          {"features", kFeatureNames},
          {"weights", weights}};
}

CommanderParams params_from_json(const json& doc) {
  ObjectReader r(doc, "params");
  int version = 0;
  if (!r.find("version")) throw ConfigError("params.version: missing");
  r.integer("version", version);
  if (version != kParamsVersion) {
    throw ConfigError("params.version: unsupported version " + std::to_string(version));
  }
  if (const json* names = r.find("features")) {
    if (*names != json(kFeatureNames)) throw ConfigError("params.features: feature order mismatch");
  }
  const json* weights = r.find("weights");
  if (!weights) throw ConfigError("params.weights: missing");
  ObjectReader w(*weights, "params.weights");
  CommanderParams p;
  p.version = version;
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    const std::string name(combat::to_string(static_cast<PolicyKind>(k)));
    const json* row = w.find(name);
    if (!row) throw ConfigError("params.weights." + name + ": missing");
    const auto values = params_row(*row, "params.weights." + name);
    for (int j = 0; j < kInputCount; ++j) p.weights[k][j] = values[j];
  }
  w.finish();
  r.finish();
  if (!p.finite()) throw ConfigError("params.weights: values must be finite");
  return p;
}

CommanderParams load_params(const std::filesystem::path& path) {
  const json doc = read_file(path);
  try {
    return params_from_json(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_params(const CommanderParams& params, const std::filesystem::path& path) {
  write_file(to_json(params), path);
}

}  // namespace acsim::agents
