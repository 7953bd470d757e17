#pragma once

#include "acsim/combat/world.hpp"

namespace acsim::agents {

using combat::ActionCommand;
using combat::Observation;
using combat::PolicyKind;

// Scripted low-level controllers.
//   attack: pure pursuit of the nearest enemy at full power, guns whenever the
//           target sits inside the engagement zone.
//   engage: lag pursuit toward a point 500 m behind the nearest enemy, guns
//           only from the rear quarter.
//   defend: turn tail on the nearest threat, full power, trade altitude for
//           speed; never fires.
// With no living enemy every policy flies straight and level at cruise power.
ActionCommand control_policy(PolicyKind kind, const Observation& obs);

namespace policy_constants {
inline constexpr double kEngageOffset = 500.0;        // m behind the target
inline constexpr double kEngageIntercept = 2500.0;    // m, beyond this engage intercepts
inline constexpr double kEngageFireAspect = deg_to_rad(60.0);
inline constexpr double kFloorAltitude = 1500.0;      // no further descent below
inline constexpr double kHardFloorAltitude = 600.0;   // forced climb below
inline constexpr double kDefendDiveAltitude = 2500.0;
inline constexpr double kMinCombatSpeed = 200.0;  // m/s, engage never slows below
// Attack keeps an altitude perch while closing: thinner air gives a higher
// top speed than the target's, then it dives once inside the dive slope.
inline constexpr double kPerchAltitude = 7000.0;
inline constexpr double kPerchClimbLimit = deg_to_rad(5.0);
inline constexpr double kDiveSlope = deg_to_rad(55.0);
inline constexpr double kDiveStartRange = 1000.0;  // m, horizontal
inline constexpr double kCornerSpeed = 230.0;
inline constexpr double kCornerFightRange = 5000.0;
inline constexpr double kCornerFightAngle = deg_to_rad(30.0);
// Dive recovery is forced when the predicted pull-out would bottom out below
// the hard floor.
inline constexpr double kRecoveryLoad = 6.0;
inline constexpr double kRecoveryRollTime = 1.0;   // s
}  // namespace policy_constants

struct Steering {
  double roll_cmd = 0.0;
  double pitch_cmd = 0.0;
  double angle_error = 0.0;  // rad between velocity and the desired direction
};

// Pull-to-point steering. `desired` is expressed in the heading frame:
// x forward (horizontal), y right, z down.
Steering steer_toward(const combat::OwnKinematics& own, const Vec3& desired);

// Throttle that holds the current speed in level flight, clamped to [0, 1].
double cruise_throttle(double speed, double altitude);

}  // namespace acsim::agents
