#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acsim/dis/pdu.hpp"
#include "acsim/flightdyn/model.hpp"

namespace acsim::combat {

using dis::EntityId;
using flightdyn::AircraftState;
using flightdyn::ControlInput;

enum class Team : std::uint8_t { kBlue, kRed };

// The three low-level control policies a commander switches between.
enum class PolicyKind : std::uint8_t { kAttack = 0, kEngage = 1, kDefend = 2 };
inline constexpr int kPolicyCount = 3;

enum class Winner : std::uint8_t { kBlue, kRed, kDraw };

std::string_view to_string(Team team);
std::string_view to_string(PolicyKind kind);
std::string_view to_string(Winner winner);
std::optional<Team> parse_team(std::string_view text);
std::optional<PolicyKind> parse_policy(std::string_view text);

inline Team opponent(Team t) { return t == Team::kBlue ? Team::kRed : Team::kBlue; }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionCommand {
  ControlInput control;
  bool fire = false;

  bool operator==(const ActionCommand&) const = default;
};

using JointAction = std::map<EntityId, ActionCommand>;

enum class Facing : std::uint8_t { kTowardEnemy, kRandom };

struct SpawnVolume {
  double north = 0.0;  // center, local NED m
  double east = 0.0;
  double radius = 2000.0;  // horizontal, m
  double altitude_min = 4000.0;
  double altitude_max = 6000.0;

  bool operator==(const SpawnVolume&) const = default;
};

struct SpawnSpec {
  SpawnVolume blue{0.0, -6000.0, 2000.0, 4000.0, 6000.0};
  SpawnVolume red{0.0, 6000.0, 2000.0, 4000.0, 6000.0};
  double speed_min = 220.0;
  double speed_max = 260.0;
  Facing facing = Facing::kTowardEnemy;

  bool operator==(const SpawnSpec&) const = default;
};

struct HumanSlots {
  int blue = 1;
  int red = 0;

  bool operator==(const HumanSlots&) const = default;
};

// Weapon and reward constants. Defaults are the production values; tests may
// override them (for example hit_probability = 1 for symmetry harnesses).
struct CombatRules {
  double hit_probability = 0.35;
  double gun_range = 1500.0;                 // m
  double gun_cone = deg_to_rad(10.0);        // rad, inclusive
  double gun_cooldown = 1.0;                 // s
  double decision_dt = 0.05;                 // 20 Hz
  int substeps = 5;                          // 5 x 10 ms integration

  bool operator==(const CombatRules&) const = default;
};

inline constexpr int kMaxTeamSize = 10;

struct ScenarioConfig {
  int blue_count = 1;
  int red_count = 1;
  SpawnSpec spawn;
  double time_limit = 600.0;  // s; 0 gives an empty episode that ends at reset
  std::uint64_t seed = 0;
  int curriculum_stage = 0;
  HumanSlots human_slots;
  CombatRules rules;

  bool operator==(const ScenarioConfig&) const = default;
};

// Throws ConfigError describing the first violated invariant.
void validate(const ScenarioConfig& config);

enum class EventKind : std::uint8_t { kFire, kHit, kKill, kCrash, kTimeout };
std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kFire;
  std::optional<EntityId> shooter;
  std::optional<EntityId> target;

  bool operator==(const Event&) const = default;
};

struct AircraftRecord {
  AircraftState state;
  Team team = Team::kBlue;
  double hp = 1.0;
  PolicyKind active_policy = PolicyKind::kAttack;
  bool alive = true;
  // Driven by a remote simulator; advanced by dead reckoning, never by actions.
  bool external = false;
  double gun_ready_time = 0.0;
  double lock_time = 0.0;
  bool lock_rewarded = false;
  double nearest_threat_range = 0.0;

  bool operator==(const AircraftRecord&) const = default;
};

struct WorldState {
  double time = 0.0;
  std::uint64_t step_count = 0;
  std::map<EntityId, AircraftRecord> aircraft;
  std::mt19937_64 rng;
  std::vector<Event> event_log;
  ScenarioConfig config;
  bool done = false;
  Winner winner = Winner::kDraw;

  bool operator==(const WorldState&) const = default;
};

// Entity numbering: blue (1, 1, i), red (1, 2, i), i starting at 1.
EntityId make_entity_id(Team team, int index);

}  // namespace acsim::combat
