#pragma once

// 3-DOF point-mass aircraft: speed / heading / flight-path angle, integrated
// with classic RK4. All airframe numbers live in AirframeConstants.

#include <stdexcept>

#include "acsim/core.hpp"

namespace acsim::flightdyn {

inline constexpr double kIntegrationStep = 0.01;  // 100 Hz

// F-16-like ballpark values.
struct AirframeConstants {
  double mass = 9000.0;                // kg, wet
  double max_thrust = 128000.0;        // N at zero airspeed
  double thrust_zero_speed = 1200.0;   // m/s where the linear lapse reaches zero
  double wing_area = 27.9;             // m^2
  double cd0 = 0.02;
  double induced_drag_k = 0.12;
  double min_speed = 60.0;             // m/s
  double max_speed = 600.0;            // m/s
  double min_load_factor = -1.0;       // g
  double max_load_factor = 9.0;        // g
  double max_bank_rate = deg_to_rad(120.0);
  double max_flight_path_angle = deg_to_rad(85.0);
  double fuel_burn_per_second = 1.0 / 900.0;  // fraction of tank at full throttle
};

inline const AirframeConstants kDefaultAirframe{};

struct AircraftState {
  Vec3 position;  // NED, m (down positive)
  double speed = 200.0;              // true airspeed, m/s
  double heading = 0.0;              // rad, [0, 2pi)
  double flight_path_angle = 0.0;    // rad
  double bank = 0.0;                 // rad, [-pi, pi]
  double throttle = 0.0;             // [0, 1]
  double fuel_fraction = 1.0;        // [0, 1]

  double altitude() const { return -position.z; }
  Vec3 velocity() const;
  bool finite() const;
  bool operator==(const AircraftState&) const = default;
};

struct ControlInput {
  double throttle = 0.0;   // [0, 1]
  double pitch_cmd = 0.0;  // [-1, 1] -> load factor [-1, 9] g, 0 -> 1 g
  double roll_cmd = 0.0;   // [-1, 1] -> bank rate, full scale 120 deg/s

  bool within_ranges() const;
  bool operator==(const ControlInput&) const = default;
};

class InfeasibleTrim : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ISA troposphere with an isothermal layer above 11 km.
double air_density(double altitude);

double load_factor(double pitch_cmd, const AirframeConstants& k = kDefaultAirframe);
double pitch_for_load_factor(double n, const AirframeConstants& k = kDefaultAirframe);
double thrust(double throttle, double speed, const AirframeConstants& k = kDefaultAirframe);
double drag(double speed, double altitude, double n, const AirframeConstants& k = kDefaultAirframe);

// Advances the state by dt seconds. The input is held constant over the step.
AircraftState step(const AircraftState& state, const ControlInput& input, double dt,
                   const AirframeConstants& k = kDefaultAirframe);

// Steady, wings-level, unaccelerated flight at the given speed and altitude.
ControlInput trim(double speed, double altitude, const AirframeConstants& k = kDefaultAirframe);

// Throttle holding speed at load factor n; throws InfeasibleTrim above full power.
double steady_throttle(double speed, double altitude, double n,
                       const AirframeConstants& k = kDefaultAirframe);

// Level coordinated turn at the given bank (|bank| < 90 deg).
ControlInput coordinated_turn(double speed, double altitude, double bank,
                              const AirframeConstants& k = kDefaultAirframe);

// h + v^2 / 2g
double specific_energy(const AircraftState& s);

}  // namespace acsim::flightdyn
