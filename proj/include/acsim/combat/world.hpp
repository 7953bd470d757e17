#pragma once

#include <array>
#include <span>
#include <vector>

#include "acsim/combat/types.hpp"

namespace acsim::combat {

// ---------------------------------------------------------------------------
// Geometry

// Angle between the shooter's velocity vector (its nose for a point mass) and
// the line of sight to the target.
double antenna_train_angle(const AircraftState& shooter, const AircraftState& target);

// Angle between the target's tail and the line of sight from the target to
// the viewer; 0 means the viewer sits dead astern.
double aspect_angle(const AircraftState& viewer, const AircraftState& target);

double range(const AircraftState& a, const AircraftState& b);

// Inside the gun engagement zone: range <= 1500 m and ATA <= 10 deg, both inclusive.
bool wez_check(const AircraftState& shooter, const AircraftState& target,
               const CombatRules& rules = {});

// ---------------------------------------------------------------------------
// Rewards

// Per-step reward inputs for one aircraft.
struct RewardTerms {
  int kills = 0;
  bool died = false;
  // Geometry after the step against the nearest living enemy.
  double nearest_enemy_range = 0.0;
  double nearest_enemy_ata = kPi;
  bool rear_quarter_lock = false;  // lock held for >= 2 s reached this step
  bool escaped_threat = false;     // nearest threat crossed outward past 5 km
};

namespace reward_constants {
inline constexpr double kKill = 1.0;
inline constexpr double kDeath = -1.0;
inline constexpr double kAttackStep = -0.001;
inline constexpr double kEngageShaping = 0.5;
inline constexpr double kEngageShapingRange = 3000.0;
inline constexpr double kEngageShapingCone = deg_to_rad(30.0);
inline constexpr double kEngageLock = 1.0;
inline constexpr double kLockAta = deg_to_rad(30.0);
inline constexpr double kLockAspect = deg_to_rad(60.0);
inline constexpr double kLockRange = 3000.0;
inline constexpr double kLockDuration = 2.0;
inline constexpr double kDefendStep = 0.0005;
inline constexpr double kDefendEscape = 0.3;
inline constexpr double kEscapeRange = 5000.0;
}  // namespace reward_constants

double reward(PolicyKind policy, const RewardTerms& terms);

double discounted_return(std::span<const double> rewards, double gamma);

// ---------------------------------------------------------------------------
// Environment

struct StepResult {
  std::map<EntityId, double> rewards;
  bool done = false;
};

WorldState reset(const ScenarioConfig& config);

// joint_action must hold exactly one entry per living, non-external aircraft.
StepResult step(WorldState& world, const JointAction& joint_action);

bool is_done(const WorldState& world);
int alive_count(const WorldState& world, Team team);

// Marks an aircraft as remotely simulated.
void set_external(WorldState& world, const EntityId& id, bool external);
// Overwrites the mirrored state of an external aircraft.
void apply_external_state(WorldState& world, const EntityId& id, const AircraftState& state,
                          bool alive);

// ---------------------------------------------------------------------------
// Observation

inline constexpr int kEnemySlots = kMaxTeamSize;
inline constexpr int kAllySlots = kMaxTeamSize - 1;

struct OwnKinematics {
  double speed = 0.0;
  double altitude = 0.0;
  double heading = 0.0;
  double flight_path_angle = 0.0;
  double bank = 0.0;
  double hp = 0.0;
  double throttle = 0.0;
  double fuel = 0.0;
};

struct RelativeBlock {
  double range = 0.0;             // m
  double bearing = 0.0;           // rad, relative to own heading, (-pi, pi]
  double elevation = 0.0;         // rad, line of sight above the horizon
  double aspect_angle = 0.0;      // rad, [0, pi]
  double heading_crossing = 0.0;  // rad, other heading - own heading, (-pi, pi]
  double closure = 0.0;           // m/s, positive when closing
  double altitude_delta = 0.0;    // m, other - own
  double alive = 0.0;             // 1 or 0

  bool operator==(const RelativeBlock&) const = default;
};

// Fixed-size, padded to a 10-vs-10 roster. Enemy and ally slots follow the
// roster order of the other team / own team, so a slot always belongs to the
// same aircraft. Dead or absent aircraft leave a zero block with mask 0.
struct Observation {
  OwnKinematics own;
  std::array<RelativeBlock, kEnemySlots> enemies{};
  std::array<std::uint8_t, kEnemySlots> enemy_mask{};
  std::array<RelativeBlock, kAllySlots> allies{};
  std::array<std::uint8_t, kAllySlots> ally_mask{};

  static constexpr std::size_t kFlatSize = 8 + (8 + 1) * (kEnemySlots + kAllySlots);
  std::vector<double> flatten() const;
};

Observation observe(const WorldState& world, const EntityId& viewer);

}  // namespace acsim::combat
