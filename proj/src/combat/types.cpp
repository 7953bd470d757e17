#include "acsim/combat/types.hpp"

#include <cmath>

namespace acsim::combat {

std::string_view to_string(Team team) { return team == Team::kBlue ? "blue" : "red"; }

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kAttack: return "attack";
    case PolicyKind::kEngage: return "engage";
    case PolicyKind::kDefend: return "defend";
  }
  return "attack";
}

std::string_view to_string(Winner winner) {
  switch (winner) {
    case Winner::kBlue: return "blue";
    case Winner::kRed: return "red";
    case Winner::kDraw: return "draw";
  }
  return "draw";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kFire: return "fire";
    case EventKind::kHit: return "hit";
    case EventKind::kKill: return "kill";
    case EventKind::kCrash: return "crash";
    case EventKind::kTimeout: return "timeout";
  }
  return "fire";
}

std::optional<Team> parse_team(std::string_view text) {
  if (text == "blue") return Team::kBlue;
  if (text == "red") return Team::kRed;
  return std::nullopt;
}

std::optional<PolicyKind> parse_policy(std::string_view text) {
  if (text == "attack") return PolicyKind::kAttack;
  if (text == "engage") return PolicyKind::kEngage;
  if (text == "defend") return PolicyKind::kDefend;
  return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto kind : {EventKind::kFire, EventKind::kHit, EventKind::kKill, EventKind::kCrash,
                    EventKind::kTimeout}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

EntityId make_entity_id(Team team, int index) {
  return {1, static_cast<std::uint16_t>(team == Team::kBlue ? 1 : 2),
          static_cast<std::uint16_t>(index + 1)};
}

namespace {

void check_volume(const SpawnVolume& v, const char* team) {
  const std::string prefix = std::string("spawn.") + team;
  if (!std::isfinite(v.north) || !std::isfinite(v.east)) {
    throw ConfigError(prefix + ": center must be finite");
  }
  if (!(v.radius >= 0.0)) throw ConfigError(prefix + ".radius must be >= 0");
  if (!(v.altitude_min > 0.0 && v.altitude_min <= v.altitude_max)) {
    throw ConfigError(prefix + ": altitude band must satisfy 0 < min <= max");
  }
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.blue_count < 1 || c.blue_count > kMaxTeamSize) {
    throw ConfigError("blue_count must be in [1, 10]");
  }
  if (c.red_count < 1 || c.red_count > kMaxTeamSize) {
    throw ConfigError("red_count must be in [1, 10]");
  }
  if (!(c.time_limit >= 0.0) || !std::isfinite(c.time_limit)) {
    throw ConfigError("time_limit must be finite and >= 0");
  }
  if (c.curriculum_stage < 0) throw ConfigError("curriculum_stage must be >= 0");
  check_volume(c.spawn.blue, "blue");
  check_volume(c.spawn.red, "red");
  const auto& k = flightdyn::kDefaultAirframe;
  if (!(c.spawn.speed_min >= k.min_speed && c.spawn.speed_max <= k.max_speed &&
        c.spawn.speed_min <= c.spawn.speed_max)) {
    throw ConfigError("spawn speed band outside the flight envelope");
  }
  const double separation =
      std::hypot(c.spawn.blue.north - c.spawn.red.north, c.spawn.blue.east - c.spawn.red.east);
  const bool horizontally_disjoint = separation > c.spawn.blue.radius + c.spawn.red.radius;
  const bool vertically_disjoint = c.spawn.blue.altitude_max < c.spawn.red.altitude_min ||
                                   c.spawn.red.altitude_max < c.spawn.blue.altitude_min;
  if (!horizontally_disjoint && !vertically_disjoint) {
    throw ConfigError("blue and red spawn volumes overlap");
  }
  if (c.human_slots.blue < 0 || c.human_slots.blue > c.blue_count || c.human_slots.red < 0 ||
      c.human_slots.red > c.red_count) {
    throw ConfigError("human_slots exceed team size");
  }
  if (!(c.rules.hit_probability >= 0.0 && c.rules.hit_probability <= 1.0)) {
    throw ConfigError("hit_probability must be in [0, 1]");
  }
  if (c.rules.substeps < 1 || !(c.rules.decision_dt > 0.0)) {
    throw ConfigError("decision step must be positive");
  }
}

}  // namespace acsim::combat
