#pragma once

// WGS-84 conversions between the simulation's local North-East-Down frame and
// the geocentric (ECEF) frame DIS puts on the wire.

#include <array>

#include "acsim/core.hpp"

namespace acsim::dis {

inline constexpr double kWgs84SemiMajor = 6378137.0;
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;

struct Geodetic {
  double latitude = 0.0;   // rad
  double longitude = 0.0;  // rad
  double altitude = 0.0;   // m above the ellipsoid
};

Geodetic geodetic_from_degrees(double lat_deg, double lon_deg, double alt_m);

Vec3 geodetic_to_ecef(const Geodetic& g);
Geodetic ecef_to_geodetic(const Vec3& ecef);

// Euler angles, z-y-x order: psi (yaw), theta (pitch), phi (roll).
struct EulerAngles {
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

// Tangent-plane frame anchored at a geodetic origin. The mapping is a rigid
// motion, so distances and angles are preserved exactly.
class LocalFrame {
 public:
  explicit LocalFrame(const Geodetic& origin);

  const Geodetic& origin() const { return origin_; }
  const Vec3& origin_ecef() const { return origin_ecef_; }

  Vec3 ned_to_ecef(const Vec3& ned) const;
  Vec3 ecef_to_ned(const Vec3& ecef) const;
  Vec3 ned_vector_to_ecef(const Vec3& v) const;
  Vec3 ecef_vector_to_ned(const Vec3& v) const;

  // Body attitude relative to NED (heading, pitch, bank) <-> DIS orientation
  // relative to the ECEF axes.
  EulerAngles local_to_dis(const EulerAngles& local) const;
  EulerAngles dis_to_local(const EulerAngles& dis) const;

 private:
  Geodetic origin_;
  Vec3 origin_ecef_;
  // Rows are the N, E, D unit vectors expressed in ECEF.
  std::array<Vec3, 3> axes_;
};

// One-shot helpers; prefer LocalFrame in loops.
Vec3 ned_to_ecef(const Vec3& ned, const Geodetic& origin);
Vec3 ecef_to_ned(const Vec3& ecef, const Geodetic& origin);

}  // namespace acsim::dis
