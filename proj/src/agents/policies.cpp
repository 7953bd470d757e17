#include "acsim/agents/policies.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace acsim::agents {

namespace {

namespace pc = policy_constants;
using combat::RelativeBlock;

constexpr double kPursuitGain = 1.5;     // 1/s, normal acceleration per rad of error
constexpr double kRollTimeConstant = 0.3;
constexpr double kSpeedGain = 0.02;      // throttle per m/s of speed error

std::optional<int> nearest_enemy(const Observation& obs) {
  std::optional<int> best;
  for (int i = 0; i < combat::kEnemySlots; ++i) {
    if (obs.enemy_mask[i] == 0) continue;
    if (!best || obs.enemies[i].range < obs.enemies[*best].range) best = i;
  }
  return best;
}

Vec3 line_of_sight(const RelativeBlock& b) {
  return {std::cos(b.elevation) * std::cos(b.bearing), std::cos(b.elevation) * std::sin(b.bearing),
          -std::sin(b.elevation)};
}

// Angle between the own velocity vector and a heading-frame direction.
double angle_off_velocity(const combat::OwnKinematics& own, const Vec3& dir) {
  const double cg = std::cos(own.flight_path_angle), sg = std::sin(own.flight_path_angle);
  const Vec3 velocity{cg, 0.0, -sg};
  return std::atan2(velocity.cross(dir).norm(), velocity.dot(dir));
}

// Altitude lost pulling out of the current dive at the recovery load factor.
double pullout_loss(const combat::OwnKinematics& own) {
  const double gamma = own.flight_path_angle;
  if (gamma >= 0.0) return 0.0;
  const double radius = own.speed * own.speed / (kGravity * (pc::kRecoveryLoad - 1.0));
  return radius * (1.0 - std::cos(gamma)) - own.speed * std::sin(gamma) * pc::kRecoveryRollTime;
}

// Keeps the desired direction out of the ground.
Vec3 apply_floor(const combat::OwnKinematics& own, Vec3 desired) {
  const double horizontal = std::max(std::hypot(desired.x, desired.y), 1e-6);
  const double climb = std::tan(deg_to_rad(15.0));
  if (own.altitude - pullout_loss(own) < pc::kHardFloorAltitude) {
    // Wings level and pull straight ahead, whatever the tactical demand.
    return {1.0, 0.0, -climb};
  }
  if (own.altitude < pc::kHardFloorAltitude) {
    desired.z = std::min(desired.z, -climb * horizontal);
  } else if (own.altitude - pullout_loss(own) < pc::kFloorAltitude) {
    desired.z = std::min(desired.z, 0.0);
  }
  return desired;
}

ActionCommand fly_straight(const Observation& obs) {
  ActionCommand cmd;
  const Steering s = steer_toward(obs.own, apply_floor(obs.own, {1.0, 0.0, 0.0}));
  cmd.control = {cruise_throttle(obs.own.speed, obs.own.altitude), s.pitch_cmd, s.roll_cmd};
  return cmd;
}

// Energy intercept: aim at a point above the target that sinks onto it along
// the dive slope, never above the perch and never below the target.
Vec3 perch_intercept(const Observation& obs, const RelativeBlock& target) {
  const Vec3 los = line_of_sight(target);
  const double horizontal = target.range * std::cos(target.elevation);
  const double above = std::max(0.0, horizontal - pc::kDiveStartRange) * std::tan(pc::kDiveSlope);
  const double ceiling =
      std::max({0.0, target.altitude_delta, pc::kPerchAltitude - obs.own.altitude});
  const double rise = std::clamp(target.altitude_delta + above,
                                 std::min(target.altitude_delta, 0.0), ceiling);
  return {los.x * target.range, los.y * target.range,
          -std::min(rise, horizontal * std::tan(pc::kPerchClimbLimit))};
}

ActionCommand attack(const Observation& obs, const RelativeBlock& target) {
  const Vec3 los = line_of_sight(target);
  const Vec3 desired = perch_intercept(obs, target);
  const Steering s = steer_toward(obs.own, apply_floor(obs.own, desired));
  // Turn rate rises as speed falls, so bleed toward corner speed while the
  // nose is well off the aim point in a close fight.
  double throttle = 1.0;
  const double ata = angle_off_velocity(obs.own, los);
  if (target.range < pc::kCornerFightRange && s.angle_error > pc::kCornerFightAngle) {
    throttle = std::clamp(cruise_throttle(obs.own.speed, obs.own.altitude) +
                              kSpeedGain * (pc::kCornerSpeed - obs.own.speed),
                          0.0, 1.0);
  }
  ActionCommand cmd;
  cmd.control = {throttle, s.pitch_cmd, s.roll_cmd};
  const combat::CombatRules rules;
  cmd.fire = target.range <= rules.gun_range && ata <= rules.gun_cone;
  return cmd;
}

ActionCommand engage(const Observation& obs, const RelativeBlock& target) {
  const Vec3 los = line_of_sight(target);
  const Vec3 target_position = los * target.range;
  const Vec3 target_heading{std::cos(target.heading_crossing), std::sin(target.heading_crossing),
                            0.0};
  const Vec3 aim = target_position - target_heading * pc::kEngageOffset;
  const double aim_horizontal = std::hypot(aim.x, aim.y);

  const combat::CombatRules rules;
  const bool fire = target.range <= rules.gun_range &&
                    angle_off_velocity(obs.own, los) <= rules.gun_cone &&
                    target.aspect_angle <= pc::kEngageFireAspect;
  if (aim_horizontal > pc::kEngageIntercept) {
    // Far from the offset point: close the distance like attack does.
    const Steering s = steer_toward(obs.own, apply_floor(obs.own, perch_intercept(obs, target)));
    return {{1.0, s.pitch_cmd, s.roll_cmd}, fire};
  }

  Vec3 desired = aim;
  if (aim_horizontal < 300.0) {
    // On station: fly parallel to the target, correcting height slowly.
    desired = target_heading + Vec3{0.0, 0.0, std::clamp(aim.z / 1000.0, -0.3, 0.3)};
  }
  const Steering s = steer_toward(obs.own, apply_floor(obs.own, desired));

  // Estimated target speed from closure, then close on the offset point.
  const double target_speed = std::max(obs.own.speed - target.closure, 60.0);
  const double along = aim.x;  // m ahead of own nose to the offset point
  const double wanted = std::max(
      target_speed + std::clamp(0.15 * along, -60.0, 120.0), pc::kMinCombatSpeed);
  const double throttle =
      std::clamp(cruise_throttle(obs.own.speed, obs.own.altitude) +
                     kSpeedGain * (wanted - obs.own.speed),
                 0.0, 1.0);

  return {{throttle, s.pitch_cmd, s.roll_cmd}, fire};
}

ActionCommand defend(const Observation& obs, const RelativeBlock& threat) {
  const double away = threat.bearing + kPi;
  double climb = 0.0;
  if (obs.own.altitude > pc::kDefendDiveAltitude) {
    climb = deg_to_rad(-10.0);
  } else if (obs.own.altitude < 1200.0) {
    climb = deg_to_rad(5.0);
  }
  const Vec3 desired{std::cos(climb) * std::cos(away), std::cos(climb) * std::sin(away),
                     -std::sin(climb)};
  const Steering s = steer_toward(obs.own, apply_floor(obs.own, desired));
  ActionCommand cmd;
  cmd.control = {1.0, s.pitch_cmd, s.roll_cmd};
  cmd.fire = false;
  return cmd;
}

}  // namespace

double cruise_throttle(double speed, double altitude) {
  const double available = flightdyn::thrust(1.0, speed);
  if (available <= 0.0) return 1.0;
  return std::clamp(flightdyn::drag(speed, std::max(altitude, 0.0), 1.0) / available, 0.0, 1.0);
}

Steering steer_toward(const combat::OwnKinematics& own, const Vec3& desired) {
  const auto& k = flightdyn::kDefaultAirframe;
  const double cg = std::cos(own.flight_path_angle), sg = std::sin(own.flight_path_angle);
  // Components in the wings-level wind frame.
  const double dx = desired.x * cg - desired.z * sg;
  const double dy = desired.y;
  const double dz = desired.x * sg + desired.z * cg;
  const double normal = std::hypot(dy, dz);

  Steering s;
  s.angle_error = std::atan2(normal, dx);
  const double demand = kPursuitGain * s.angle_error * std::max(own.speed, 1.0);
  double ay = 0.0, az = 0.0;
  if (normal > 1e-12) {
    ay = demand * dy / normal;
    az = demand * dz / normal;
  }
  az -= kGravity * cg;  // lift also carries the weight component

  const double bank_wanted = std::atan2(ay, -az);
  const double load_wanted = std::hypot(ay, az) / kGravity;
  const double bank_error = wrap_pi(bank_wanted - own.bank);
  s.roll_cmd = clamp_unit(bank_error / (k.max_bank_rate * kRollTimeConstant));
  const double load = 1.0 + (load_wanted - 1.0) * std::max(0.0, std::cos(bank_error));
  s.pitch_cmd = flightdyn::pitch_for_load_factor(load);
  return s;
}

ActionCommand control_policy(PolicyKind kind, const Observation& obs) {
  const auto target = nearest_enemy(obs);
  if (!target) return fly_straight(obs);
  const RelativeBlock& block = obs.enemies[*target];
  switch (kind) {
    case PolicyKind::kAttack: return attack(obs, block);
    case PolicyKind::kEngage: return engage(obs, block);
    case PolicyKind::kDefend: return defend(obs, block);
  }
  return fly_straight(obs);
}

}  // namespace acsim::agents
