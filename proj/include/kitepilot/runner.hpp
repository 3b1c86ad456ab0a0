// Closed-loop scenario execution and CSV telemetry.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kitepilot/scenario.hpp"
#include "kitepilot/sysid.hpp"

namespace kitepilot {

/// One row per controller tick. Angles are wrapped to (-pi, pi].
struct LogRow {
  double t = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
  double psi_s = 0.0;
  double psi_c = 0.0;
  double psi_m = 0.0;
  double psi_dot_m = 0.0;
  double psi_dot_s = 0.0;
  double psi_dot_c = 0.0;
  double delta = 0.0;  // actuator deflection held until the next tick
  double delta_ff = 0.0;
  double delta_fbk = 0.0;
  double v_a = 0.0;    // measured air path speed
  double v0 = 0.0;     // true wind speed
  int guidance_state = 0;
  double g_hat = 0.0;
  double M_hat = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "t,phi,theta,psi,psi_s,psi_c,psi_m,psi_dot_m,psi_dot_s,psi_dot_c,delta,delta_ff,delta_fbk,v_a,v0,"
    "guidance_state,g_hat,M_hat";

enum class Outcome { Completed, Crash, SingularState };

std::string_view to_string(Outcome outcome);
/// 0 Completed, 2 Crash, 3 SingularState.
int exit_code(Outcome outcome);

struct SysidEstimate {
  double g_hat = 0.0;
  double M_hat = 0.0;
  double batch_g_hat = 0.0;
  double batch_residual_rms = 0.0;
};

struct RunSummary {
  Outcome outcome = Outcome::Completed;
  std::string message;
  std::size_t rows = 0;
  int transitions = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double va_min = 0.0;
  double va_max = 0.0;
  double peak_delta = 0.0;
  double peak_delta_ff = 0.0;
  double peak_delta_fbk = 0.0;
  double va_ratio = 0.0;  // mean v_a / v0 over the second half of the log
  double psi_tracking_rms = 0.0;  // rms of psi_m - psi_c
  std::optional<SysidEstimate> sysid;
};

struct RunResult {
  std::vector<LogRow> log;
  RunSummary summary;
};

/// Runs a validated scenario. Terminal plant errors end the run early and are
/// reported through summary.outcome; the log holds every completed tick.
RunResult run_scenario(const Scenario& s);

/// Aggregates computed from log rows alone. Used by run_scenario and
/// reproducible from a parsed CSV.
RunSummary summarize(const std::vector<LogRow>& log, Outcome outcome, std::string message);

void write_csv(std::ostream& out, const std::vector<LogRow>& log);
/// Throws ParseError on a header mismatch or malformed row.
std::vector<LogRow> read_csv(std::istream& in);

std::vector<LogSample> to_samples(const std::vector<LogRow>& log);

/// Batch and RLS identification over a log. Throws DegenerateRegressorError.
SysidEstimate identify(const std::vector<LogRow>& log, int sensor_delay, double lambda, bool with_rls);

std::string summary_json(const RunSummary& s, std::string_view scenario_name);

}  // namespace kitepilot
