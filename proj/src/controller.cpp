#include "kitepilot/controller.hpp"

#include <algorithm>
#include <cmath>

#include "kitepilot/errors.hpp"

namespace kitepilot {

void ControllerConfig::validate() const {
  if (!(g_hat > 0.0)) throw ValidationError("g_hat must be positive");
  if (!(delta_ff_limit > 0.0 && delta_ff_limit < delta_total_limit && delta_total_limit <= 1.0))
    throw ValidationError("limits must satisfy 0 < delta_ff_limit < delta_total_limit <= 1");
  if (!(rate_limit > 0.0)) throw ValidationError("rate_limit must be positive");
  if (delay_n < 0) throw ValidationError("delay_n must be non-negative");
  if (!(outer_P >= 0.0 && inner_Kp >= 0.0 && inner_Ki >= 0.0)) throw ValidationError("gains must be non-negative");
  if (!(outer_lowpass_tau >= 0.0 && inner_lowpass_tau >= 0.0))
    throw ValidationError("lowpass time constants must be non-negative");
  if (!(outer_rate_limit > 0.0)) throw ValidationError("outer_rate_limit must be positive");
  if (!(psi_c_limit > 0.0)) throw ValidationError("psi_c_limit must be positive");
  if (!(va_min > 0.0)) throw ValidationError("va_min must be positive");
  if (!(sample_dt > 0.0)) throw ValidationError("sample_dt must be positive");
}

double ControllerConfig::plant_gain(double v_a) const { return g_hat * std::max(v_a, va_min); }

double shaping_f(double x, double rate_limit) {
  return std::copysign(std::sqrt(2.0 * rate_limit * std::abs(x)), x);
}

double braking_deflection(double psi_error, double K, double rate_limit, double dt) {
  // Ramping down from d in steps of r = rate_limit * dt while integrating
  // K * d * dt covers K dt d (d + r) / (2 r); solve that for d.
  const double continuous = shaping_f(K * std::abs(psi_error), rate_limit) / K;
  const double r = rate_limit * dt;
  const double d = 0.5 * (std::sqrt(r * r + 4.0 * continuous * continuous) - r);
  return std::copysign(d, psi_error);
}

DelayLine::DelayLine(std::size_t n, double initial) : buffer_(n, initial) {}

double DelayLine::push(double x) {
  if (buffer_.empty()) return x;
  const double out = buffer_[head_];
  buffer_[head_] = x;
  head_ = (head_ + 1) % buffer_.size();
  return out;
}

void DelayLine::fill(double value) { std::fill(buffer_.begin(), buffer_.end(), value); }

Lowpass::Lowpass(double tau, double dt) : alpha_(tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0) {}

double Lowpass::step(double x) {
  y_ += alpha_ * (x - y_);
  return y_;
}

PsiFeedforward::PsiFeedforward(const ControllerConfig& cfg)
    : cfg_(cfg), psi_c_delay_(static_cast<std::size_t>(cfg.delay_n)) {}

PsiFeedforward::Output PsiFeedforward::step(double psi_s, double K) {
  const double target = std::clamp(psi_s, -cfg_.psi_c_limit, cfg_.psi_c_limit);
  const double max_step = cfg_.rate_limit * cfg_.sample_dt;

  double wanted = braking_deflection(target - model_psi_, K, cfg_.rate_limit, cfg_.sample_dt);
  wanted = std::clamp(wanted, -cfg_.delta_ff_limit, cfg_.delta_ff_limit);
  model_delta_ += std::clamp(wanted - model_delta_, -max_step, max_step);

  Output out;
  out.psi_dot_ff = K * model_delta_;
  model_psi_ += out.psi_dot_ff * cfg_.sample_dt;
  out.psi_c = psi_c_delay_.push(model_psi_);
  return out;
}

void PsiFeedforward::reset(double psi) {
  model_psi_ = psi;
  model_delta_ = 0.0;
  psi_c_delay_.fill(psi);
}

PsiFeedback::PsiFeedback(const ControllerConfig& cfg) : cfg_(cfg), lowpass_(cfg.outer_lowpass_tau, cfg.sample_dt) {}

double PsiFeedback::step(double psi_e) {
  const double rate = lowpass_.step(-cfg_.outer_P * psi_e);
  return std::clamp(rate, -cfg_.outer_rate_limit, cfg_.outer_rate_limit);
}

RateFeedforward::RateFeedforward(const ControllerConfig& cfg)
    : cfg_(cfg), command_delay_(static_cast<std::size_t>(cfg.delay_n)) {}

RateFeedforward::Output RateFeedforward::step(double psi_dot_s, double K, double T1) {
  const double max_step = cfg_.rate_limit * cfg_.sample_dt;
  const double wanted = std::clamp(psi_dot_s / K - T1, -cfg_.delta_ff_limit, cfg_.delta_ff_limit);
  delta_ff_ += std::clamp(wanted - delta_ff_, -max_step, max_step);
  return {delta_ff_, K * command_delay_.push(delta_ff_ + T1)};
}

void RateFeedforward::reset() {
  delta_ff_ = 0.0;
  command_delay_.fill(0.0);
}

RateFeedback::RateFeedback(const ControllerConfig& cfg) : cfg_(cfg), lowpass_(cfg.inner_lowpass_tau, cfg.sample_dt) {}

double RateFeedback::step(double psi_dot_e, double K) {
  const double limit = cfg_.feedback_limit();
  const double error = -lowpass_.step(psi_dot_e);
  integrator_ = std::clamp(integrator_ + cfg_.inner_Ki * error * cfg_.sample_dt / K, -limit, limit);
  return std::clamp(cfg_.inner_Kp * error / K + integrator_, -limit, limit);
}

void RateFeedback::reset() {
  lowpass_.reset(0.0);
  integrator_ = 0.0;
}

CascadedController::CascadedController(const ControllerConfig& cfg)
    : cfg_(cfg), ff_psi_(cfg), c_psi_(cfg), ff_psidot_(cfg), c_psidot_(cfg) {
  cfg_.validate();
}

ControlOutput CascadedController::step(double psi_s, const Measurements& m) {
  const double v_a = std::max(m.v_a, cfg_.va_min);
  const double K = cfg_.plant_gain(m.v_a);

  ControlOutput out;
  out.T1 = cfg_.M_hat / K * m.gravity_proj / v_a;

  const auto shaped = ff_psi_.step(psi_s, K);
  out.psi_c = shaped.psi_c;
  out.psi_dot_ff = shaped.psi_dot_ff;
  out.psi_dot_fbk = c_psi_.step(m.psi_m - out.psi_c);
  out.psi_dot_s = out.psi_dot_ff + out.psi_dot_fbk;

  const auto ff = ff_psidot_.step(out.psi_dot_s, K, out.T1);
  out.delta_ff = ff.delta_ff;
  out.psi_dot_c = ff.psi_dot_c;
  out.delta_fbk = c_psidot_.step(m.psi_dot_m - out.psi_dot_c, K);
  out.delta_cmd = std::clamp(out.delta_ff + out.delta_fbk, -cfg_.delta_total_limit, cfg_.delta_total_limit);
  return out;
}

void CascadedController::reset(double psi) {
  ff_psi_.reset(psi);
  c_psi_.reset();
  ff_psidot_.reset();
  c_psidot_.reset();
}

}  // namespace kitepilot
