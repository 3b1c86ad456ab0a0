#include "kitepilot/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kitepilot/errors.hpp"

namespace kitepilot {

namespace {

constexpr int kTurbulenceComponents = 8;
constexpr double kTurbulenceMinHz = 0.02;
constexpr double kTurbulenceMaxHz = 0.5;

}  // namespace

void PlantLimits::validate() const {
  if (!(theta_min > 0.0 && theta_min < std::numbers::pi / 2))
    throw ValidationError("theta_min must lie in (0, pi/2)");
  if (!(va_min > 0.0)) throw ValidationError("va_min must be positive");
  if (!(crash_elevation < std::numbers::pi / 2)) throw ValidationError("crash_elevation must be below pi/2");
}

void ActuatorParams::validate() const {
  if (!(rate_limit > 0.0)) throw ValidationError("rate_limit must be positive");
}

void WindModel::Params::validate() const {
  if (!(mean >= 0.0)) throw ValidationError("v0 must be non-negative");
  if (!(gust_amplitude >= 0.0)) throw ValidationError("gust_amplitude must be non-negative");
  if (!(gust_period > 0.0)) throw ValidationError("gust_period must be positive");
  if (!(turbulence >= 0.0)) throw ValidationError("turbulence must be non-negative");
}

WindModel::WindModel(const Params& params) : params_(params) {
  if (params_.turbulence <= 0.0) return;
  std::mt19937_64 rng(params_.seed);
  std::uniform_real_distribution<double> freq(kTurbulenceMinHz, kTurbulenceMaxHz);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double amplitude = params_.turbulence * std::sqrt(2.0 / kTurbulenceComponents);
  for (int i = 0; i < kTurbulenceComponents; ++i) {
    const double hz = freq(rng);
    turbulence_.push_back({amplitude, 2.0 * std::numbers::pi * hz, phase(rng)});
  }
}

double WindModel::speed_at(double t) const {
  double v = params_.mean;
  if (params_.gust_amplitude > 0.0)
    v += params_.gust_amplitude * std::sin(2.0 * std::numbers::pi * t / params_.gust_period);
  for (const auto& c : turbulence_) v += c.amplitude * std::sin(c.omega * t + c.phase);
  return std::max(v, 0.0);
}

StateRates state_derivative(const KiteState& s, double delta, const AeroParams& p, double wind_speed,
                            const PlantLimits& limits) {
  const auto& a = s.angles;
  if (!(a.theta >= limits.theta_min))
    throw SingularStateError("theta=" + std::to_string(a.theta) + " below theta_min");

  const double E = p.glide_ratio;
  const double L = p.line_length;
  const double st = std::sin(a.theta), ct = std::cos(a.theta);
  const double v_a = airpath_speed(wind_speed, E, a.theta);

  StateRates r;
  r.theta_dot = wind_speed / L * (E * ct * std::cos(a.psi) - st);
  r.phi_dot = -wind_speed * E / (L * std::tan(a.theta)) * std::sin(a.psi);

  double gyro_rate = p.steer_gain * v_a * delta;
  if (p.mass_term != 0.0) {
    if (!(v_a >= limits.va_min))
      throw DegenerateWindError("v_a=" + std::to_string(v_a) + " below va_min with nonzero mass term");
    gyro_rate += p.mass_term * gravity_projection(a) / v_a;
  }
  r.psi_dot = limits.rate_correction ? gyro_rate + r.phi_dot * ct : gyro_rate;
  return r;
}

double hold_deflection(const KiteState& s, const AeroParams& p, double wind_speed, const PlantLimits& limits) {
  const StateRates free = state_derivative(s, 0.0, p, wind_speed, limits);
  const double K = p.steer_gain * airpath_speed(wind_speed, p.glide_ratio, s.angles.theta);
  return -free.psi_dot / K;
}

ActuatorState actuator_step(const ActuatorState& a, double delta_cmd, const ActuatorParams& p, double dt) {
  const double target = std::clamp(delta_cmd, -1.0, 1.0);
  const double max_step = p.rate_limit * dt;
  return {a.delta + std::clamp(target - a.delta, -max_step, max_step)};
}

KiteState integrate_step(const KiteState& s, double delta, const AeroParams& p, const WindModel& wind,
                         double dt, const PlantLimits& limits) {
  auto advance = [&](const StateRates& r, double h) {
    KiteState out = s;
    out.angles.psi += h * r.psi_dot;
    out.angles.theta += h * r.theta_dot;
    out.angles.phi += h * r.phi_dot;
    out.t += h;
    return out;
  };
  const double v_start = wind.speed_at(s.t);
  const double v_mid = wind.speed_at(s.t + 0.5 * dt);
  const double v_end = wind.speed_at(s.t + dt);

  const StateRates k1 = state_derivative(s, delta, p, v_start, limits);
  const StateRates k2 = state_derivative(advance(k1, 0.5 * dt), delta, p, v_mid, limits);
  const StateRates k3 = state_derivative(advance(k2, 0.5 * dt), delta, p, v_mid, limits);
  const StateRates k4 = state_derivative(advance(k3, dt), delta, p, v_end, limits);

  KiteState next = s;
  next.angles.psi += dt / 6.0 * (k1.psi_dot + 2.0 * k2.psi_dot + 2.0 * k3.psi_dot + k4.psi_dot);
  next.angles.theta += dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
  next.angles.phi += dt / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);
  next.t = s.t + dt;

  if (next.angles.theta < limits.theta_min)
    throw SingularStateError("theta=" + std::to_string(next.angles.theta) + " below theta_min");
  if (elevation(next.angles) < limits.crash_elevation)
    throw CrashError("elevation " + std::to_string(elevation(next.angles)) + " rad below crash threshold at t=" +
                     std::to_string(next.t));
  return next;
}

void SensorParams::validate() const {
  if (delay_steps < 0) throw ValidationError("delay_steps must be non-negative");
  if (!(sigma_psi >= 0.0 && sigma_psi_dot >= 0.0 && sigma_va >= 0.0 && sigma_phi >= 0.0))
    throw ValidationError("noise sigmas must be non-negative");
  if (!(sample_dt > 0.0)) throw ValidationError("sample_dt must be positive");
}

Sensor::Sensor(const SensorParams& params, std::uint64_t seed) : params_(params), rng_(seed) {}

double Sensor::noise(double sigma) { return sigma > 0.0 ? sigma * unit_(rng_) : 0.0; }

Measurements Sensor::sense(const KiteState& s, const StateRates& rates, double v_a) {
  Measurements m;
  m.t = s.t;
  m.psi_m = s.angles.psi + noise(params_.sigma_psi);
  const double gyro = params_.rate_correction ? measured_yaw_rate(rates.psi_dot, rates.phi_dot, s.angles.theta)
                                              : rates.psi_dot;
  m.psi_dot_m = gyro + noise(params_.sigma_psi_dot);
  m.v_a = std::max(v_a + noise(params_.sigma_va), 0.0);
  m.phi_m = s.angles.phi + noise(params_.sigma_phi);
  m.theta_m = s.angles.theta;
  m.gravity_proj = gravity_projection(s.angles);

  if (fifo_.empty()) fifo_.assign(static_cast<std::size_t>(params_.delay_steps), m);
  fifo_.push_back(m);
  Measurements out = fifo_.front();
  fifo_.pop_front();
  return out;
}

}  // namespace kitepilot
