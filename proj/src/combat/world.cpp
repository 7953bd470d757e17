#include "acsim/combat/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acsim::combat {

namespace {

constexpr double kAngleTolerance = 1e-9;
constexpr double kNoThreat = std::numeric_limits<double>::infinity();

double angle_between(const Vec3& a, const Vec3& b) {
  const double cross = a.cross(b).norm();
  const double dot = a.dot(b);
  if (cross == 0.0 && dot == 0.0) return 0.0;
  return std::atan2(cross, dot);
}

struct Nearest {
  const AircraftRecord* record = nullptr;
  double range = kNoThreat;
};

Nearest nearest_enemy(const WorldState& world, const AircraftRecord& self) {
  Nearest best;
  for (const auto& [id, other] : world.aircraft) {
    if (!other.alive || other.team == self.team) continue;
    const double r = range(self.state, other.state);
    if (r < best.range) best = {&other, r};
  }
  return best;
}

AircraftState spawn_aircraft(const SpawnVolume& volume, const SpawnSpec& spec, double toward,
                             std::mt19937_64& rng) {
  const double r = volume.radius * std::sqrt(uniform01(rng));
  const double theta = kTwoPi * uniform01(rng);
  const double altitude =
      volume.altitude_min + (volume.altitude_max - volume.altitude_min) * uniform01(rng);
  const double speed = spec.speed_min + (spec.speed_max - spec.speed_min) * uniform01(rng);
  const double random_heading = kTwoPi * uniform01(rng);

  AircraftState s;
  s.position = {volume.north + r * std::cos(theta), volume.east + r * std::sin(theta), -altitude};
  s.speed = speed;
  s.heading = wrap_two_pi(spec.facing == Facing::kTowardEnemy ? toward : random_heading);
  try {
    s.throttle = flightdyn::trim(speed, altitude).throttle;
  } catch (const flightdyn::InfeasibleTrim& e) {
    throw ConfigError(std::string("infeasible spawn: ") + e.what());
  }
  return s;
}

bool check_terminal(WorldState& world) {
  const int blue = alive_count(world, Team::kBlue);
  const int red = alive_count(world, Team::kRed);
  if (blue == 0 || red == 0) {
    world.done = true;
    world.winner = blue > 0 ? Winner::kBlue : (red > 0 ? Winner::kRed : Winner::kDraw);
    return true;
  }
  if (world.time >= world.config.time_limit - 1e-9) {
    world.done = true;
    world.winner = Winner::kDraw;
    world.event_log.push_back({world.time, EventKind::kTimeout, std::nullopt, std::nullopt});
    return true;
  }
  return false;
}

void validate_joint_action(const WorldState& world, const JointAction& joint_action) {
  for (const auto& [id, action] : joint_action) {
    const auto it = world.aircraft.find(id);
    if (it == world.aircraft.end()) {
      throw ContractViolation("step: action for unknown entity " + dis::to_string(id));
    }
    if (!it->second.alive) {
      throw ContractViolation("step: action for dead entity " + dis::to_string(id));
    }
    if (it->second.external) {
      throw ContractViolation("step: action for external entity " + dis::to_string(id));
    }
    if (!action.control.within_ranges()) {
      throw ContractViolation("step: control out of range for " + dis::to_string(id));
    }
  }
  for (const auto& [id, record] : world.aircraft) {
    if (record.alive && !record.external && !joint_action.contains(id)) {
      throw ContractViolation("step: missing action for " + dis::to_string(id));
    }
  }
}

}  // namespace

double range(const AircraftState& a, const AircraftState& b) {
  return (b.position - a.position).norm();
}

double antenna_train_angle(const AircraftState& shooter, const AircraftState& target) {
  return angle_between(shooter.velocity(), target.position - shooter.position);
}

double aspect_angle(const AircraftState& viewer, const AircraftState& target) {
  return angle_between(target.velocity() * -1.0, viewer.position - target.position);
}

bool wez_check(const AircraftState& shooter, const AircraftState& target,
               const CombatRules& rules) {
  return range(shooter, target) <= rules.gun_range &&
         antenna_train_angle(shooter, target) <= rules.gun_cone + kAngleTolerance;
}

double reward(PolicyKind policy, const RewardTerms& t) {
  namespace rc = reward_constants;
  switch (policy) {
    case PolicyKind::kAttack:
      return rc::kKill * t.kills + (t.died ? rc::kDeath : 0.0) + rc::kAttackStep;
    case PolicyKind::kEngage: {
      if (t.died) return rc::kDeath;
      double r = t.rear_quarter_lock ? rc::kEngageLock : 0.0;
      if (t.nearest_enemy_range <= rc::kEngageShapingRange) {
        r += rc::kEngageShaping *
             std::max(0.0, std::cos(t.nearest_enemy_ata) - std::cos(rc::kEngageShapingCone));
      }
      return r;
    }
    case PolicyKind::kDefend:
      if (t.died) return rc::kDeath;
      return rc::kDefendStep + (t.escaped_threat ? rc::kDefendEscape : 0.0);
  }
  return 0.0;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ContractViolation("discounted_return: gamma must be in [0, 1)");
  }
  double total = 0.0;
  double weight = 1.0;
  for (const double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

int alive_count(const WorldState& world, Team team) {
  return static_cast<int>(std::count_if(world.aircraft.begin(), world.aircraft.end(),
                                        [team](const auto& entry) {
                                          return entry.second.alive && entry.second.team == team;
                                        }));
}

bool is_done(const WorldState& world) { return world.done; }

WorldState reset(const ScenarioConfig& config) {
  validate(config);
  WorldState world;
  world.config = config;
  world.rng.seed(config.seed);

  const auto& spawn = config.spawn;
  const double blue_to_red =
      std::atan2(spawn.red.east - spawn.blue.east, spawn.red.north - spawn.blue.north);
  for (int i = 0; i < config.blue_count; ++i) {
    AircraftRecord rec;
    rec.team = Team::kBlue;
    rec.state = spawn_aircraft(spawn.blue, spawn, blue_to_red, world.rng);
    world.aircraft.emplace(make_entity_id(Team::kBlue, i), rec);
  }
  for (int i = 0; i < config.red_count; ++i) {
    AircraftRecord rec;
    rec.team = Team::kRed;
    rec.state = spawn_aircraft(spawn.red, spawn, blue_to_red + kPi, world.rng);
    world.aircraft.emplace(make_entity_id(Team::kRed, i), rec);
  }
  for (auto& [id, rec] : world.aircraft) {
    rec.nearest_threat_range = nearest_enemy(world, rec).range;
  }
  check_terminal(world);
  return world;
}

StepResult step(WorldState& world, const JointAction& joint_action) {
  if (world.done) throw ContractViolation("step: episode already finished");
  validate_joint_action(world, joint_action);

  const CombatRules& rules = world.config.rules;
  const double now = world.time;
  std::map<EntityId, bool> alive_at_start;
  for (const auto& [id, rec] : world.aircraft) alive_at_start[id] = rec.alive;
  std::map<EntityId, int> kills;

  // Guns resolve against the geometry the decision was made on.
  for (const auto& [id, action] : joint_action) {
    auto& shooter = world.aircraft.at(id);
    if (!action.fire || now + 1e-9 < shooter.gun_ready_time) continue;
    shooter.gun_ready_time = now + rules.gun_cooldown;

    std::optional<EntityId> target;
    double best = kNoThreat;
    for (const auto& [other_id, other] : world.aircraft) {
      if (other.team == shooter.team || !alive_at_start[other_id]) continue;
      if (!wez_check(shooter.state, other.state, rules)) continue;
      const double r = range(shooter.state, other.state);
      if (r < best) {
        best = r;
        target = other_id;
      }
    }
    world.event_log.push_back({now, EventKind::kFire, id, target});
    if (!target) continue;
    if (uniform01(world.rng) >= rules.hit_probability) continue;
    auto& victim = world.aircraft.at(*target);
    world.event_log.push_back({now, EventKind::kHit, id, target});
    const bool was_alive = victim.hp > 0.0;
    victim.hp = std::max(0.0, victim.hp - 1.0);
    if (was_alive && victim.hp <= 0.0) {
      victim.alive = false;
      ++kills[id];
      world.event_log.push_back({now, EventKind::kKill, id, target});
    }
  }

  const double total_dt = rules.decision_dt;
  const double sub_dt = total_dt / rules.substeps;
  for (auto& [id, rec] : world.aircraft) {
    if (!rec.alive) continue;
    if (rec.external) {
      rec.state.position += rec.state.velocity() * total_dt;
      continue;
    }
    const ControlInput& input = joint_action.at(id).control;
    for (int i = 0; i < rules.substeps; ++i) rec.state = flightdyn::step(rec.state, input, sub_dt);
  }

  ++world.step_count;
  world.time = static_cast<double>(world.step_count) * total_dt;

  for (auto& [id, rec] : world.aircraft) {
    if (rec.alive && rec.state.altitude() <= 0.0) {
      rec.alive = false;
      rec.hp = 0.0;
      world.event_log.push_back({world.time, EventKind::kCrash, std::nullopt, id});
    }
  }

  StepResult result;
  for (auto& [id, rec] : world.aircraft) {
    if (!alive_at_start[id]) continue;
    RewardTerms terms;
    terms.kills = kills[id];
    terms.died = !rec.alive;
    const Nearest threat = nearest_enemy(world, rec);
    if (rec.alive && threat.record != nullptr) {
      terms.nearest_enemy_range = threat.range;
      terms.nearest_enemy_ata = antenna_train_angle(rec.state, threat.record->state);
      namespace rc = reward_constants;
      const bool locked = threat.range <= rc::kLockRange && terms.nearest_enemy_ata <= rc::kLockAta &&
                          aspect_angle(rec.state, threat.record->state) <= rc::kLockAspect;
      if (locked) {
        rec.lock_time += total_dt;
        if (rec.lock_time >= rc::kLockDuration - 1e-9 && !rec.lock_rewarded) {
          rec.lock_rewarded = true;
          terms.rear_quarter_lock = true;
        }
      } else {
        rec.lock_time = 0.0;
        rec.lock_rewarded = false;
      }
      terms.escaped_threat = rec.nearest_threat_range <= rc::kEscapeRange &&
                             threat.range > rc::kEscapeRange;
    } else {
      terms.nearest_enemy_range = kNoThreat;
    }
    rec.nearest_threat_range = threat.range;
    result.rewards[id] = reward(rec.active_policy, terms);
  }

  result.done = check_terminal(world);
  return result;
}

void set_external(WorldState& world, const EntityId& id, bool external) {
  auto it = world.aircraft.find(id);
  if (it == world.aircraft.end()) {
    throw ContractViolation("set_external: unknown entity " + dis::to_string(id));
  }
  it->second.external = external;
}

void apply_external_state(WorldState& world, const EntityId& id, const AircraftState& state,
                          bool alive) {
  auto it = world.aircraft.find(id);
  if (it == world.aircraft.end() || !it->second.external) {
    throw ContractViolation("apply_external_state: not an external entity " + dis::to_string(id));
  }
  it->second.state = state;
  if (it->second.alive && !alive) it->second.hp = 0.0;
  it->second.alive = it->second.alive && alive;
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(kFlatSize);
  out.insert(out.end(), {own.speed, own.altitude, own.heading, own.flight_path_angle, own.bank,
                         own.hp, own.throttle, own.fuel});
  auto push = [&out](const RelativeBlock& b, std::uint8_t mask) {
    out.insert(out.end(), {b.range, b.bearing, b.elevation, b.aspect_angle, b.heading_crossing,
                           b.closure, b.altitude_delta, b.alive, static_cast<double>(mask)});
  };
  for (int i = 0; i < kEnemySlots; ++i) push(enemies[i], enemy_mask[i]);
  for (int i = 0; i < kAllySlots; ++i) push(allies[i], ally_mask[i]);
  return out;
}

namespace {

RelativeBlock relative_block(const AircraftState& own, const AircraftState& other) {
  RelativeBlock b;
  const Vec3 d = other.position - own.position;
  b.range = d.norm();
  const double horizontal = std::hypot(d.x, d.y);
  b.bearing = horizontal > 0.0 ? wrap_pi(std::atan2(d.y, d.x) - own.heading) : 0.0;
  b.elevation = b.range > 0.0 ? std::atan2(-d.z, horizontal) : 0.0;
  b.aspect_angle = aspect_angle(own, other);
  b.heading_crossing = wrap_pi(other.heading - own.heading);
  b.closure = b.range > 0.0 ? -(other.velocity() - own.velocity()).dot(d) / b.range : 0.0;
  b.altitude_delta = other.altitude() - own.altitude();
  b.alive = 1.0;
  return b;
}

}  // namespace

Observation observe(const WorldState& world, const EntityId& viewer) {
  const auto it = world.aircraft.find(viewer);
  if (it == world.aircraft.end()) {
    throw ContractViolation("observe: unknown viewer " + dis::to_string(viewer));
  }
  const AircraftRecord& self = it->second;
  Observation obs;
  obs.own = {self.state.speed,    self.state.altitude(), self.state.heading,
             self.state.flight_path_angle, self.state.bank, self.hp,
             self.state.throttle, self.state.fuel_fraction};

  int enemy_slot = 0;
  int ally_slot = 0;
  for (const auto& [id, other] : world.aircraft) {
    if (id == viewer) continue;
    const bool enemy = other.team != self.team;
    const int slot = enemy ? enemy_slot++ : ally_slot++;
    if (!other.alive) continue;
    if (enemy) {
      obs.enemies[slot] = relative_block(self.state, other.state);
      obs.enemy_mask[slot] = 1;
    } else {
      obs.allies[slot] = relative_block(self.state, other.state);
      obs.ally_mask[slot] = 1;
    }
  }
  return obs;
}

}  // namespace acsim::combat
