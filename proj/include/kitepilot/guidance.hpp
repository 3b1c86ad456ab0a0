// Setpoint generation: figure-eight pattern, bang-bang identification flight,
// neutral azimuth hold and a plain step/square reference.
#pragma once

#include <variant>

namespace kitepilot {

struct PatternConfig {
  double phi_0 = 0.0;   // rad, pattern center
  double phi_a = 0.6;   // rad, half width
  double psi_0 = 1.4;   // rad, commanded orientation magnitude

  void validate() const;
};

/// Two-state figure-eight generator. State 1 commands +psi_0 until
/// phi_m < phi_0 - phi_a, state 2 commands -psi_0 until phi_m > phi_0 + phi_a.
class PatternGuidance {
 public:
  explicit PatternGuidance(const PatternConfig& cfg, int initial_state = 1);

  double step(double phi_m);
  int state() const { return state_; }
  int transitions() const { return transitions_; }
  const PatternConfig& config() const { return cfg_; }

 private:
  PatternConfig cfg_;
  int state_;
  int transitions_ = 0;
};

struct BangBangConfig {
  double delta_0 = 0.4;        // deflection magnitude
  double psi_threshold = 1.0;  // rad

  void validate() const;
};

/// Identification flight: +delta_0 until psi_m >= threshold, then -delta_0
/// until psi_m <= -threshold, and so on. Emits a deflection, not a setpoint.
class BangBangGuidance {
 public:
  explicit BangBangGuidance(const BangBangConfig& cfg, int initial_sign = 1);

  double step(double psi_m);
  int sign() const { return sign_; }
  int transitions() const { return transitions_; }

 private:
  BangBangConfig cfg_;
  int sign_;
  int transitions_ = 0;
};

struct NeutralConfig {
  double phi_set = 0.0;      // rad
  double kp = 6.0;           // rad psi per rad phi
  double ki = 0.02;          // 1/s
  double kd = 1.0;           // s
  double d_filter_tau = 0.3; // s
  double psi_limit = 1.4;    // rad

  void validate() const;
};

/// PID from the azimuth error phi_m - phi_set to psi_s, derivative taken on
/// the filtered measurement. Positive error yields positive psi_s, which
/// drives phi_dot negative.
class NeutralGuidance {
 public:
  NeutralGuidance(const NeutralConfig& cfg, double dt);

  double step(double phi_m);

 private:
  NeutralConfig cfg_;
  double dt_;
  double integral_ = 0.0;
  double filtered_phi_ = 0.0;
  double d_alpha_;
  bool primed_ = false;
};

struct StepConfig {
  double amplitude = 0.5;   // rad
  double start_time = 2.0;  // s
  double period = 0.0;      // s; zero means a single step, otherwise a +/- square wave

  void validate() const;
};

class StepGuidance {
 public:
  explicit StepGuidance(const StepConfig& cfg) : cfg_(cfg) {}
  double step(double t) const;

 private:
  StepConfig cfg_;
};

/// Exactly one active guidance mode.
using Guidance = std::variant<PatternGuidance, BangBangGuidance, NeutralGuidance, StepGuidance>;

}  // namespace kitepilot
