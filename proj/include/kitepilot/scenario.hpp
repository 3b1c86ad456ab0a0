// Scenario description and its line-oriented text format.
//
//   # comment
//   [section]
//   key = value
//
// Keys are unique per section; unknown sections or keys are rejected. See
// README.md for the full key list and defaults.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kitepilot/controller.hpp"
#include "kitepilot/guidance.hpp"
#include "kitepilot/plant.hpp"

namespace kitepilot {

enum class Mode { Step, BangBang, Pattern, Neutral, SysidReplay };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

struct SysidConfig {
  bool enabled = false;
  double lambda = 0.995;
};

struct InitialConditions {
  double phi = 0.0;
  std::optional<double> theta;  // defaults to the steady-state theta of psi
  double psi = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  Mode mode = Mode::Step;
  double duration = 60.0;  // s
  std::uint64_t seed = 1;
  double dt_inner = 0.01;  // s
  std::string replay_log;  // sysid-replay input

  AeroParams aero;
  ActuatorParams actuator;
  WindModel::Params wind;
  SensorParams sensor;
  PlantLimits plant;

  // Controller model values left unset follow the plant (exact model match).
  ControllerConfig controller;
  std::optional<double> g_hat;
  std::optional<double> M_hat;
  std::optional<double> controller_rate_limit;

  PatternConfig pattern;
  int pattern_initial_state = 1;
  BangBangConfig bangbang;
  NeutralConfig neutral;
  StepConfig step;
  InitialConditions initial;
  SysidConfig sysid;

  /// Controller configuration with plant-following defaults resolved.
  ControllerConfig resolved_controller() const;
  Angles initial_angles() const;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Parses and validates. Syntax problems raise ParseError listing every bad
/// line; invariant violations raise ValidationError.
Scenario parse_scenario(std::string_view text);

/// Text form that parse_scenario maps back to an equal scenario.
std::string serialize_scenario(const Scenario& s);

/// Assigns one "section.key" value as the parser would. Throws ParseError for
/// unknown keys or malformed values.
void set_scenario_value(Scenario& s, std::string_view dotted_key, std::string_view value);

/// All "section.key" names understood by the parser, in serialization order.
std::vector<std::string> scenario_keys();

}  // namespace kitepilot
