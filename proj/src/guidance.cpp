#include "kitepilot/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kitepilot/errors.hpp"

namespace kitepilot {

void PatternConfig::validate() const {
  if (!(phi_a > 0.0)) throw ValidationError("phi_a must be positive");
  if (!(psi_0 > 0.0 && psi_0 < std::numbers::pi / 2)) throw ValidationError("psi_0 must lie in (0, pi/2)");
  if (!std::isfinite(phi_0)) throw ValidationError("phi_0 must be finite");
}

PatternGuidance::PatternGuidance(const PatternConfig& cfg, int initial_state) : cfg_(cfg), state_(initial_state) {
  cfg_.validate();
  if (state_ != 1 && state_ != 2) throw ValidationError("pattern state must be 1 or 2");
}

double PatternGuidance::step(double phi_m) {
  if (state_ == 1 && phi_m < cfg_.phi_0 - cfg_.phi_a) {
    state_ = 2;
    ++transitions_;
  } else if (state_ == 2 && phi_m > cfg_.phi_0 + cfg_.phi_a) {
    state_ = 1;
    ++transitions_;
  }
  return state_ == 1 ? cfg_.psi_0 : -cfg_.psi_0;
}

void BangBangConfig::validate() const {
  if (!(delta_0 > 0.0 && delta_0 <= 1.0)) throw ValidationError("delta_0 must lie in (0, 1]");
  if (!(psi_threshold > 0.0 && psi_threshold < std::numbers::pi))
    throw ValidationError("psi_threshold must lie in (0, pi)");
}

BangBangGuidance::BangBangGuidance(const BangBangConfig& cfg, int initial_sign)
    : cfg_(cfg), sign_(initial_sign >= 0 ? 1 : -1) {
  cfg_.validate();
}

double BangBangGuidance::step(double psi_m) {
  if (sign_ > 0 && psi_m >= cfg_.psi_threshold) {
    sign_ = -1;
    ++transitions_;
  } else if (sign_ < 0 && psi_m <= -cfg_.psi_threshold) {
    sign_ = 1;
    ++transitions_;
  }
  return sign_ * cfg_.delta_0;
}

void NeutralConfig::validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw ValidationError("neutral gains must be non-negative");
  if (!(d_filter_tau >= 0.0)) throw ValidationError("d_filter_tau must be non-negative");
  if (!(psi_limit > 0.0 && psi_limit < std::numbers::pi / 2))
    throw ValidationError("psi_limit must lie in (0, pi/2)");
}

NeutralGuidance::NeutralGuidance(const NeutralConfig& cfg, double dt)
    : cfg_(cfg), dt_(dt), d_alpha_(cfg.d_filter_tau > 0.0 ? 1.0 - std::exp(-dt / cfg.d_filter_tau) : 1.0) {
  cfg_.validate();
}

double NeutralGuidance::step(double phi_m) {
  if (!primed_) {
    filtered_phi_ = phi_m;
    primed_ = true;
  }
  const double previous = filtered_phi_;
  filtered_phi_ += d_alpha_ * (phi_m - filtered_phi_);
  const double phi_rate = (filtered_phi_ - previous) / dt_;

  const double error = phi_m - cfg_.phi_set;
  const double limit = cfg_.psi_limit;
  const double unclamped = cfg_.kp * error + integral_ + cfg_.ki * error * dt_ + cfg_.kd * phi_rate;
  // Conditional integration: freeze the integrator while the output saturates
  // in the direction of the error.
  if (std::abs(unclamped) < limit || unclamped * error < 0.0) integral_ += cfg_.ki * error * dt_;
  return std::clamp(cfg_.kp * error + integral_ + cfg_.kd * phi_rate, -limit, limit);
}

void StepConfig::validate() const {
  if (!std::isfinite(amplitude)) throw ValidationError("step amplitude must be finite");
  if (!(start_time >= 0.0)) throw ValidationError("step start_time must be non-negative");
  if (!(period >= 0.0)) throw ValidationError("step period must be non-negative");
}

double StepGuidance::step(double t) const {
  if (t < cfg_.start_time) return 0.0;
  if (cfg_.period <= 0.0) return cfg_.amplitude;
  const auto half_periods = static_cast<long long>(std::floor((t - cfg_.start_time) / (0.5 * cfg_.period)));
  return half_periods % 2 == 0 ? cfg_.amplitude : -cfg_.amplitude;
}

}  // namespace kitepilot
