#include "kitepilot/kinematics.hpp"

#include <numbers>

#include "kitepilot/errors.hpp"

namespace kitepilot {

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
          (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
          (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
}

Mat3 Mat3::transpose() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  return r;
}

double Mat3::determinant() const {
  const auto& a = *this;
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 rotation_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
}

Mat3 rotation_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

void AeroParams::validate() const {
  if (!(glide_ratio > 0.0)) throw ValidationError("E must be positive");
  if (!(steer_gain > 0.0)) throw ValidationError("g must be positive");
  if (!(line_length > 0.0)) throw ValidationError("L must be positive");
  if (!std::isfinite(mass_term)) throw ValidationError("M must be finite");
}

Vec3 kite_position(const Angles& a, double line_length) {
  const double st = std::sin(a.theta);
  return line_length * Vec3{std::cos(a.theta), std::sin(a.phi) * st, -std::cos(a.phi) * st};
}

Mat3 rotation_matrix(const Angles& a) {
  return rotation_x(a.phi) * rotation_y(a.theta) * rotation_x(-a.psi);
}

BodyAxes basis_vectors(const Angles& a) {
  const double sf = std::sin(a.phi), cf = std::cos(a.phi);
  const double st = std::sin(a.theta), ct = std::cos(a.theta);
  const double sp = std::sin(a.psi), cp = std::cos(a.psi);
  return {
      {-st * cp, -cf * sp + sf * ct * cp, -sf * sp - cf * ct * cp},
      {st * sp, -cf * cp - sf * ct * sp, -sf * cp + cf * ct * sp},
      {-ct, -sf * st, cf * st},
  };
}

double steady_state_theta(double psi, double glide_ratio) {
  return std::atan(glide_ratio * std::cos(psi));
}

double airpath_speed(double wind_speed, double glide_ratio, double theta) {
  return wind_speed * glide_ratio * std::cos(theta);
}

VelocityComponents velocity_components(double wind_speed, double glide_ratio, const Angles& a) {
  const double st = std::sin(a.theta);
  return {wind_speed * (glide_ratio * std::cos(a.theta) - st * std::cos(a.psi)),
          wind_speed * st * std::sin(a.psi)};
}

Vec3 airflow_vector(double wind_speed, const VelocityComponents& v, const Angles& a) {
  const BodyAxes axes = basis_vectors(a);
  return Vec3{wind_speed, 0.0, 0.0} - v.roll * axes.roll - v.pitch * axes.pitch;
}

double measured_yaw_rate(double psi_dot, double phi_dot, double theta) {
  return psi_dot - phi_dot * std::cos(theta);
}

double gravity_projection(const Angles& a) { return dot(kUnitZ, basis_vectors(a).pitch); }

double elevation(const Angles& a) { return std::asin(std::cos(a.phi) * std::sin(a.theta)); }

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(angle, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

}  // namespace kitepilot
