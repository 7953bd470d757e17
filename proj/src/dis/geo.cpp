#include "acsim/dis/geo.hpp"

#include <cmath>

namespace acsim::dis {

namespace {

constexpr double kE2 = kWgs84Flattening * (2.0 - kWgs84Flattening);

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 euler_to_matrix(const EulerAngles& e) {
  const double cps = std::cos(e.psi), sps = std::sin(e.psi);
  const double cth = std::cos(e.theta), sth = std::sin(e.theta);
  const double cph = std::cos(e.phi), sph = std::sin(e.phi);
  return {{{cps * cth, cps * sth * sph - sps * cph, cps * sth * cph + sps * sph},
           {sps * cth, sps * sth * sph + cps * cph, sps * sth * cph - cps * sph},
           {-sth, cth * sph, cth * cph}}};
}

EulerAngles matrix_to_euler(const Mat3& m) {
  return {std::atan2(m[1][0], m[0][0]), std::asin(clamp_unit(-m[2][0])),
          std::atan2(m[2][1], m[2][2])};
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

}  // namespace

Geodetic geodetic_from_degrees(double lat_deg, double lon_deg, double alt_m) {
  return {deg_to_rad(lat_deg), deg_to_rad(lon_deg), alt_m};
}

Vec3 geodetic_to_ecef(const Geodetic& g) {
  const double slat = std::sin(g.latitude), clat = std::cos(g.latitude);
  const double n = kWgs84SemiMajor / std::sqrt(1.0 - kE2 * slat * slat);
  return {(n + g.altitude) * clat * std::cos(g.longitude),
          (n + g.altitude) * clat * std::sin(g.longitude),
          (n * (1.0 - kE2) + g.altitude) * slat};
}

Geodetic ecef_to_geodetic(const Vec3& ecef) {
  const double p = std::hypot(ecef.x, ecef.y);
  const double lon = std::atan2(ecef.y, ecef.x);
  double lat = std::atan2(ecef.z, p * (1.0 - kE2));
  double alt = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double slat = std::sin(lat);
    const double n = kWgs84SemiMajor / std::sqrt(1.0 - kE2 * slat * slat);
    if (std::abs(std::cos(lat)) > 1e-9) {
      alt = p / std::cos(lat) - n;
    } else {
      alt = std::abs(ecef.z) - n * (1.0 - kE2);
    }
    lat = std::atan2(ecef.z, p * (1.0 - kE2 * n / (n + alt)));
  }
  return {lat, lon, alt};
}

LocalFrame::LocalFrame(const Geodetic& origin)
    : origin_(origin), origin_ecef_(geodetic_to_ecef(origin)) {
  if (!(origin.latitude >= -kPi / 2 - 1e-12 && origin.latitude <= kPi / 2 + 1e-12)) {
    throw ContractViolation("LocalFrame: origin latitude outside [-90, 90] deg");
  }
  const double slat = std::sin(origin.latitude), clat = std::cos(origin.latitude);
  const double slon = std::sin(origin.longitude), clon = std::cos(origin.longitude);
  axes_[0] = {-slat * clon, -slat * slon, clat};
  axes_[1] = {-slon, clon, 0.0};
  axes_[2] = {-clat * clon, -clat * slon, -slat};
}

Vec3 LocalFrame::ned_vector_to_ecef(const Vec3& v) const {
  return axes_[0] * v.x + axes_[1] * v.y + axes_[2] * v.z;
}

Vec3 LocalFrame::ecef_vector_to_ned(const Vec3& v) const {
  return {axes_[0].dot(v), axes_[1].dot(v), axes_[2].dot(v)};
}

Vec3 LocalFrame::ned_to_ecef(const Vec3& ned) const {
  return origin_ecef_ + ned_vector_to_ecef(ned);
}

Vec3 LocalFrame::ecef_to_ned(const Vec3& ecef) const {
  return ecef_vector_to_ned(ecef - origin_ecef_);
}

EulerAngles LocalFrame::local_to_dis(const EulerAngles& local) const {
  // Columns of ned_to_ecef are the N, E, D axes.
  Mat3 ned_to_ecef{};
  for (int r = 0; r < 3; ++r) {
    ned_to_ecef[0][r] = axes_[r].x;
    ned_to_ecef[1][r] = axes_[r].y;
    ned_to_ecef[2][r] = axes_[r].z;
  }
  return matrix_to_euler(multiply(ned_to_ecef, euler_to_matrix(local)));
}

EulerAngles LocalFrame::dis_to_local(const EulerAngles& dis) const {
  Mat3 ecef_to_ned{};
  for (int r = 0; r < 3; ++r) ecef_to_ned[r] = {axes_[r].x, axes_[r].y, axes_[r].z};
  return matrix_to_euler(multiply(ecef_to_ned, euler_to_matrix(dis)));
}

Vec3 ned_to_ecef(const Vec3& ned, const Geodetic& origin) {
  return LocalFrame(origin).ned_to_ecef(ned);
}

Vec3 ecef_to_ned(const Vec3& ecef, const Geodetic& origin) {
  return LocalFrame(origin).ecef_to_ned(ecef);
}

}  // namespace acsim::dis
