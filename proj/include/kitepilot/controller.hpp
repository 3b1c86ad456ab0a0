// Cascaded model-following autopilot running at the sample rate.
//
//   psi_s -> [FF_psi] -> psi_dot_ff, psi_c
//   psi_e = psi_m - psi_c -> [C_psi] -> psi_dot_fbk
//   psi_dot_s = psi_dot_ff + psi_dot_fbk -> [FF_psidot] -> delta_ff, psi_dot_c
//   psi_dot_e = psi_dot_m - psi_dot_c -> [C_psidot] -> delta_fbk
//   delta = delta_ff + delta_fbk
//
// Every block divides or multiplies by the plant gain K = g_hat * v_a so the
// loops see a unit-gain plant regardless of air path speed.
#pragma once

#include <cstddef>
#include <vector>

#include "kitepilot/plant.hpp"

namespace kitepilot {

struct ControllerConfig {
  double g_hat = 0.04;              // rad/m
  double M_hat = 0.0;               // m/s^2
  double delta_ff_limit = 0.6;      // feedforward share of the deflection range
  double delta_total_limit = 1.0;
  double rate_limit = 0.4;          // 1/s, actuator model inside the feedforward
  int delay_n = 3;                  // samples, z^-n in both feedforward blocks
  double outer_P = 0.8;             // 1/s
  double outer_lowpass_tau = 0.2;   // s
  double outer_rate_limit = 0.5;    // rad/s, clamp on psi_dot_fbk
  double inner_Kp = 0.3;
  double inner_Ki = 0.5;            // 1/s
  double inner_lowpass_tau = 0.2;   // s
  double psi_c_limit = 1.4;         // rad
  double va_min = 0.5;              // m/s, floor used for K and T1
  double sample_dt = 0.1;           // s

  void validate() const;
  double feedback_limit() const { return delta_total_limit - delta_ff_limit; }
  /// K = g_hat * max(v_a, va_min).
  double plant_gain(double v_a) const;
};

/// Complete per-step telemetry of the cascade.
struct ControlOutput {
  double delta_cmd = 0.0;
  double delta_ff = 0.0;
  double delta_fbk = 0.0;
  double psi_c = 0.0;
  double psi_dot_ff = 0.0;
  double psi_dot_fbk = 0.0;
  double psi_dot_s = 0.0;
  double psi_dot_c = 0.0;
  double T1 = 0.0;
};

/// sign(x) * sqrt(2 * rate_limit * |x|).
double shaping_f(double x, double rate_limit);

/// Largest deflection from which the model can ramp to zero at the rate limit
/// without overshooting psi_error, for a plant gain K and sample time dt. With
/// dt -> 0 this tends to shaping_f(K * psi_error) / K.
double braking_deflection(double psi_error, double K, double rate_limit, double dt);

/// Fixed-length z^-n FIFO. push() returns the value pushed n calls earlier.
class DelayLine {
 public:
  explicit DelayLine(std::size_t n = 0, double initial = 0.0);
  double push(double x);
  void fill(double value);
  std::size_t length() const { return buffer_.size(); }

 private:
  std::vector<double> buffer_;
  std::size_t head_ = 0;
};

/// Exact discretization of a first-order lag.
class Lowpass {
 public:
  Lowpass(double tau, double dt);
  double step(double x);
  void reset(double y) { y_ = y; }
  double value() const { return y_; }

 private:
  double alpha_;
  double y_ = 0.0;
};

/// FF_psi: internal loop that drives a steering-pod model toward psi_s and
/// emits the flyable reference psi_c together with its rate psi_dot_ff.
class PsiFeedforward {
 public:
  struct Output {
    double psi_dot_ff = 0.0;
    double psi_c = 0.0;
  };

  explicit PsiFeedforward(const ControllerConfig& cfg);
  Output step(double psi_s, double K);
  void reset(double psi);

  double model_psi() const { return model_psi_; }
  double model_delta() const { return model_delta_; }

 private:
  ControllerConfig cfg_;
  double model_psi_ = 0.0;
  double model_delta_ = 0.0;
  DelayLine psi_c_delay_;
};

/// C_psi: lowpassed proportional feedback on psi_e = psi_m - psi_c.
class PsiFeedback {
 public:
  explicit PsiFeedback(const ControllerConfig& cfg);
  double step(double psi_e);
  void reset() { lowpass_.reset(0.0); }

 private:
  ControllerConfig cfg_;
  Lowpass lowpass_;
};

/// FF_psidot: inverts the turn-rate law through the pod model (limiter then
/// rate limiter) and predicts the delayed rate psi_dot_c.
class RateFeedforward {
 public:
  struct Output {
    double delta_ff = 0.0;
    double psi_dot_c = 0.0;
  };

  explicit RateFeedforward(const ControllerConfig& cfg);
  Output step(double psi_dot_s, double K, double T1);
  void reset();

 private:
  ControllerConfig cfg_;
  double delta_ff_ = 0.0;
  DelayLine command_delay_;
};

/// C_psidot: PI on the yaw-rate error, divided by K, clamped to the feedback
/// share of the deflection range. The integrator is held in deflection units
/// and clamped to the same range.
class RateFeedback {
 public:
  explicit RateFeedback(const ControllerConfig& cfg);
  double step(double psi_dot_e, double K);
  void reset();
  double integrator() const { return integrator_; }

 private:
  ControllerConfig cfg_;
  Lowpass lowpass_;
  double integrator_ = 0.0;
};

class CascadedController {
 public:
  explicit CascadedController(const ControllerConfig& cfg);

  ControlOutput step(double psi_s, const Measurements& m);
  /// Aligns the internal model and delay lines with an initial orientation.
  void reset(double psi);

  const ControllerConfig& config() const { return cfg_; }
  const RateFeedback& rate_feedback() const { return c_psidot_; }

 private:
  ControllerConfig cfg_;
  PsiFeedforward ff_psi_;
  PsiFeedback c_psi_;
  RateFeedforward ff_psidot_;
  RateFeedback c_psidot_;
};

}  // namespace kitepilot
