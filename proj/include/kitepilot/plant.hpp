// Fixed-step simulator of the three-angle kite plant with a rate-limited
// steering actuator and a delayed, noisy sensor.
#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "kitepilot/kinematics.hpp"

namespace kitepilot {

struct KiteState {
  Angles angles;
  double t = 0.0;
};

struct StateRates {
  double psi_dot = 0.0;
  double theta_dot = 0.0;
  double phi_dot = 0.0;
};

/// Supervision thresholds and model switches of the simulator.
struct PlantLimits {
  double theta_min = 1e-2;            // rad, guard for 1/sin and 1/tan
  double va_min = 0.5;                // m/s, guard for M / v_a
  double crash_elevation = 0.0872664625997164788;  // rad (5 deg)
  bool rate_correction = true;        // add phi_dot cos(theta) to the kinematic yaw rate

  void validate() const;
};

struct ActuatorParams {
  double rate_limit = 0.4;  // 1/s, normalized deflection per second

  void validate() const;
};

struct ActuatorState {
  double delta = 0.0;
};

/// Wind at flight altitude: mean plus a slow sinusoidal gust plus seeded
/// turbulence built from a fixed set of random-phase sinusoids. The value is a
/// pure function of time, so sub-step evaluation stays deterministic.
class WindModel {
 public:
  struct Params {
    double mean = 8.0;            // m/s
    double gust_amplitude = 0.0;  // m/s
    double gust_period = 20.0;    // s
    double turbulence = 0.0;      // m/s rms of the band-limited part
    std::uint64_t seed = 1;

    void validate() const;
  };

  WindModel() : WindModel(Params{}) {}
  explicit WindModel(const Params& params);

  /// Never negative.
  double speed_at(double t) const;
  const Params& params() const { return params_; }

 private:
  struct Component {
    double amplitude;
    double omega;
    double phase;
  };

  Params params_;
  std::vector<Component> turbulence_;
};

/// Kinematic rates of the plant. The turn-rate law gives the gyro-frame rate
/// g v_a delta + M G / v_a; the kinematic rate adds phi_dot cos(theta) when
/// limits.rate_correction is set.
/// Throws SingularStateError when theta < theta_min and DegenerateWindError
/// when M != 0 and v_a < va_min.
StateRates state_derivative(const KiteState& s, double delta, const AeroParams& p, double wind_speed,
                            const PlantLimits& limits = {});

/// Deflection that keeps psi_dot = 0 at the current state.
double hold_deflection(const KiteState& s, const AeroParams& p, double wind_speed,
                       const PlantLimits& limits = {});

/// Moves delta toward clamp(cmd, -1, 1) by at most rate_limit * dt.
ActuatorState actuator_step(const ActuatorState& a, double delta_cmd, const ActuatorParams& p, double dt);

/// One RK4 step with delta held over dt. Throws CrashError when the elevation
/// at the end of the step is below the crash threshold.
KiteState integrate_step(const KiteState& s, double delta, const AeroParams& p, const WindModel& wind,
                         double dt, const PlantLimits& limits = {});

struct SensorParams {
  int delay_steps = 2;           // samples; one more sample of lag comes from the actuator hold
  double sigma_psi = 0.0;        // rad
  double sigma_psi_dot = 0.0;    // rad/s
  double sigma_va = 0.0;         // m/s
  double sigma_phi = 0.0;        // rad
  double sample_dt = 0.1;        // s
  bool rate_correction = true;   // gyro rate excludes phi_dot cos(theta)

  void validate() const;
};

struct Measurements {
  double psi_m = 0.0;
  double psi_dot_m = 0.0;
  double v_a = 0.0;
  double phi_m = 0.0;
  double theta_m = 0.0;
  double gravity_proj = 0.0;
  double t = 0.0;
};

/// Samples the true state, perturbs it with zero-mean Gaussian noise and
/// returns the sample taken delay_steps calls earlier. Until the FIFO has
/// filled, the oldest sample is repeated.
class Sensor {
 public:
  Sensor(const SensorParams& params, std::uint64_t seed);

  Measurements sense(const KiteState& s, const StateRates& rates, double v_a);
  const SensorParams& params() const { return params_; }

 private:
  SensorParams params_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> unit_{0.0, 1.0};
  std::deque<Measurements> fifo_;

  double noise(double sigma);
};

}  // namespace kitepilot
