#include "acsim/flightdyn/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace acsim::flightdyn {

namespace {

// N, E, D, speed, heading, flight-path angle, bank
using Vector = std::array<double, 7>;

Vector pack(const AircraftState& s) {
  return {s.position.x, s.position.y, s.position.z, s.speed, s.heading, s.flight_path_angle,
          s.bank};
}

Vector axpy(const Vector& y, double a, const Vector& x) {
  Vector out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + a * x[i];
  return out;
}

struct Derivative {
  double throttle;
  double n;
  double bank_rate;
  const AirframeConstants& k;

  Vector operator()(const Vector& y) const {
    const double speed = std::max(y[3], 1.0);
    const double gamma = y[5];
    const double bank = y[6];
    const double cos_gamma = std::max(std::cos(gamma), 1e-3);
    const double altitude = -y[2];
    Vector d;
    d[0] = speed * std::cos(gamma) * std::cos(y[4]);
    d[1] = speed * std::cos(gamma) * std::sin(y[4]);
    d[2] = -speed * std::sin(gamma);
    d[3] = (thrust(throttle, speed, k) - drag(speed, altitude, n, k)) / k.mass -
           kGravity * std::sin(gamma);
    d[4] = kGravity * n * std::sin(bank) / (speed * cos_gamma);
    d[5] = kGravity / speed * (n * std::cos(bank) - std::cos(gamma));
    d[6] = bank_rate;
    return d;
  }
};

void require_finite(const AircraftState& s) {
  if (!s.finite()) throw ContractViolation("flightdyn::step: non-finite state");
}

}  // namespace

Vec3 AircraftState::velocity() const {
  const double horizontal = speed * std::cos(flight_path_angle);
  return {horizontal * std::cos(heading), horizontal * std::sin(heading),
          -speed * std::sin(flight_path_angle)};
}

bool AircraftState::finite() const {
  return position.finite() && std::isfinite(speed) && std::isfinite(heading) &&
         std::isfinite(flight_path_angle) && std::isfinite(bank) && std::isfinite(throttle) &&
         std::isfinite(fuel_fraction);
}

bool ControlInput::within_ranges() const {
  return throttle >= 0.0 && throttle <= 1.0 && pitch_cmd >= -1.0 && pitch_cmd <= 1.0 &&
         roll_cmd >= -1.0 && roll_cmd <= 1.0;
}

double air_density(double altitude) {
  constexpr double kSeaLevel = 1.225;
  constexpr double kTropopause = 11000.0;
  const double h = std::max(altitude, 0.0);
  if (h <= kTropopause) return kSeaLevel * std::pow(1.0 - 2.25577e-5 * h, 4.25588);
  const double at_tropopause = kSeaLevel * std::pow(1.0 - 2.25577e-5 * kTropopause, 4.25588);
  return at_tropopause * std::exp(-(h - kTropopause) / 6341.62);
}

double load_factor(double pitch_cmd, const AirframeConstants& k) {
  const double p = clamp_unit(pitch_cmd);
  return p >= 0.0 ? 1.0 + p * (k.max_load_factor - 1.0) : 1.0 + p * (1.0 - k.min_load_factor);
}

double pitch_for_load_factor(double n, const AirframeConstants& k) {
  const double clamped = std::clamp(n, k.min_load_factor, k.max_load_factor);
  return clamped >= 1.0 ? (clamped - 1.0) / (k.max_load_factor - 1.0)
                        : (clamped - 1.0) / (1.0 - k.min_load_factor);
}

double thrust(double throttle, double speed, const AirframeConstants& k) {
  return throttle * k.max_thrust * std::max(0.0, 1.0 - speed / k.thrust_zero_speed);
}

double drag(double speed, double altitude, double n, const AirframeConstants& k) {
  const double q = 0.5 * air_density(altitude) * speed * speed;
  const double lift_coefficient = n * k.mass * kGravity / (q * k.wing_area);
  return q * k.wing_area * (k.cd0 + k.induced_drag_k * lift_coefficient * lift_coefficient);
}

AircraftState step(const AircraftState& state, const ControlInput& input, double dt,
                   const AirframeConstants& k) {
  require_finite(state);
  if (!std::isfinite(dt) || dt < 0.0) throw ContractViolation("flightdyn::step: dt must be >= 0");
  if (!input.within_ranges()) throw ContractViolation("flightdyn::step: control input out of range");
  if (dt == 0.0) return state;

  const double throttle = state.fuel_fraction > 0.0 ? input.throttle : 0.0;
  const Derivative f{throttle, load_factor(input.pitch_cmd, k), input.roll_cmd * k.max_bank_rate,
                     k};

  const Vector y = pack(state);
  const Vector k1 = f(y);
  const Vector k2 = f(axpy(y, 0.5 * dt, k1));
  const Vector k3 = f(axpy(y, 0.5 * dt, k2));
  const Vector k4 = f(axpy(y, dt, k3));
  Vector next;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  AircraftState out = state;
  out.position = {next[0], next[1], next[2]};
  out.speed = next[3];
  out.heading = wrap_two_pi(next[4]);
  out.flight_path_angle =
      std::clamp(next[5], -k.max_flight_path_angle, k.max_flight_path_angle);
  out.bank = wrap_pi(next[6]);
  out.throttle = throttle;
  out.fuel_fraction = std::max(0.0, state.fuel_fraction - k.fuel_burn_per_second * throttle * dt);

  // Below the envelope floor the aircraft mushes: the missing kinetic energy
  // is paid for with altitude, so the clamp never creates energy.
  if (out.speed < k.min_speed) {
    out.position.z += (k.min_speed * k.min_speed - out.speed * out.speed) / (2.0 * kGravity);
    out.speed = k.min_speed;
  } else if (out.speed > k.max_speed) {
    out.speed = k.max_speed;
  }
  return out;
}

double steady_throttle(double speed, double altitude, double n, const AirframeConstants& k) {
  const double available = thrust(1.0, speed, k);
  const double required = drag(speed, altitude, n, k);
  if (available <= 0.0 || required > available) {
    throw InfeasibleTrim("no throttle setting balances drag at " + std::to_string(speed) +
                         " m/s, " + std::to_string(altitude) + " m");
  }
  return required / available;
}

ControlInput trim(double speed, double altitude, const AirframeConstants& k) {
  if (!(speed >= k.min_speed && speed <= k.max_speed)) {
    throw ContractViolation("trim: speed outside flight envelope");
  }
  if (!(altitude > 0.0)) throw ContractViolation("trim: altitude must be positive");
  return {steady_throttle(speed, altitude, 1.0, k), 0.0, 0.0};
}

ControlInput coordinated_turn(double speed, double altitude, double bank,
                              const AirframeConstants& k) {
  if (!(std::abs(bank) < kPi / 2)) throw ContractViolation("coordinated_turn: |bank| >= 90 deg");
  const double n = 1.0 / std::cos(bank);
  if (n > k.max_load_factor) throw InfeasibleTrim("coordinated_turn: load factor above limit");
  return {steady_throttle(speed, altitude, n, k), pitch_for_load_factor(n, k), 0.0};
}

double specific_energy(const AircraftState& s) {
  return s.altitude() + s.speed * s.speed / (2.0 * kGravity);
}

}  // namespace acsim::flightdyn
