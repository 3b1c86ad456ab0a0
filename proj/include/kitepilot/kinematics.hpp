// Geometry and steady-state relations of the constrained kite model.
//
// Frame: e_x points downwind, e_z points down. The kite sits on a sphere of
// radius L around the tether origin and is described by three angles:
//   phi   azimuth in the wind window (rotation about e_x)
//   theta polar angle measured from the wind axis e_x
//   psi   orientation of the kite about its yaw axis
//
// Body axes (roll, pitch, yaw) form a right-handed triad, roll x pitch = yaw,
// with e_yaw = -x/L pointing from the kite toward the tether origin.
#pragma once

#include <array>
#include <cmath>

namespace kitepilot {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline constexpr Vec3 kUnitX{1.0, 0.0, 0.0};
inline constexpr Vec3 kUnitY{0.0, 1.0, 0.0};
inline constexpr Vec3 kUnitZ{0.0, 0.0, 1.0};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

  constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
  constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

  Mat3 operator*(const Mat3& o) const;
  Vec3 operator*(const Vec3& v) const;
  Mat3 transpose() const;
  double determinant() const;
};

/// Elementary rotations (active, right-handed).
Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);

struct Angles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// Design-model parameters.
struct AeroParams {
  double glide_ratio = 5.0;    // E, lift over drag
  double steer_gain = 0.04;    // g, rad/m
  double mass_term = 0.0;      // M, m/s^2
  double line_length = 300.0;  // L, m

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

struct BodyAxes {
  Vec3 roll;
  Vec3 pitch;
  Vec3 yaw;
};

/// Kinematic speeds of the kite along its roll and pitch axes.
struct VelocityComponents {
  double roll = 0.0;
  double pitch = 0.0;
};

/// L * (cos theta, sin phi sin theta, -cos phi sin theta).
Vec3 kite_position(const Angles& a, double line_length);

/// R = Rx(phi) Ry(theta) Rx(-psi). Maps the reference kite (at L e_x with
/// roll axis -e_z) onto the actual configuration, so R(-e_z) = e_roll and
/// R(-e_x) = e_yaw.
Mat3 rotation_matrix(const Angles& a);

/// Closed-form body axes in the ground frame.
BodyAxes basis_vectors(const Angles& a);

/// Polar angle of the circular orbit flown at constant orientation psi.
double steady_state_theta(double psi, double glide_ratio);

/// v_a = v0 E cos(theta).
double airpath_speed(double wind_speed, double glide_ratio, double theta);

/// Roll/pitch speeds that satisfy both flight conditions: the airflow lies in
/// the roll-yaw plane and its roll/yaw ratio equals E.
VelocityComponents velocity_components(double wind_speed, double glide_ratio, const Angles& a);

/// Apparent airflow (v0, 0, 0) - v_roll e_roll - v_pitch e_pitch.
Vec3 airflow_vector(double wind_speed, const VelocityComponents& v, const Angles& a);

/// Yaw rate seen by a body-fixed gyro: psi_dot - phi_dot cos(theta).
double measured_yaw_rate(double psi_dot, double phi_dot, double theta);

/// Projection of the downward unit vector on the pitch axis, (e_z, e_pitch).
/// Equals cos(theta) sin(psi) for phi = 0.
double gravity_projection(const Angles& a);

/// Elevation of the kite above the horizontal x-y plane.
double elevation(const Angles& a);

/// Wraps to (-pi, pi].
double wrap_angle(double angle);

}  // namespace kitepilot
