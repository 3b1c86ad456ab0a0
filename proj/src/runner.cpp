#include "kitepilot/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <variant>

#include <json.hpp>

#include "kitepilot/errors.hpp"

namespace kitepilot {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Guidance make_guidance(const Scenario& s) {
  switch (s.mode) {
    case Mode::Pattern: return PatternGuidance(s.pattern, s.pattern_initial_state);
    case Mode::BangBang: return BangBangGuidance(s.bangbang);
    case Mode::Neutral: return NeutralGuidance(s.neutral, s.sensor.sample_dt);
    case Mode::Step:
    case Mode::SysidReplay: break;
  }
  return StepGuidance(s.step);
}

RunResult replay(const Scenario& s) {
  std::ifstream in(s.replay_log);
  if (!in) throw ParseError("cannot open replay log '" + s.replay_log + "'", 0);
  RunResult result;
  result.log = read_csv(in);

  RlsState rls = rls_initial(s.sysid.lambda);
  const auto samples = to_samples(result.log);
  FlightLogRow row;
  for (std::size_t k = 0; k < result.log.size(); ++k) {
    if (align_row(samples, k, s.sensor.delay_steps, row)) rls = rls_update(rls, row, s.plant.va_min);
    result.log[k].g_hat = rls.g();
    result.log[k].M_hat = rls.M();
  }
  result.summary = summarize(result.log, Outcome::Completed, "replayed " + s.replay_log);
  result.summary.sysid = identify(result.log, s.sensor.delay_steps, s.sysid.lambda, true);
  return result;
}

void append_real(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  line += buf;
}

double field_real(std::string_view v, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError("malformed number '" + std::string(v) + "'", line);
  return out;
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return "Completed";
    case Outcome::Crash: return "Crash";
    case Outcome::SingularState: return "SingularState";
  }
  return "Completed";
}

int exit_code(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return 0;
    case Outcome::Crash: return 2;
    case Outcome::SingularState: return 3;
  }
  return 0;
}

RunResult run_scenario(const Scenario& s) {
  s.validate();
  if (s.mode == Mode::SysidReplay) return replay(s);

  const ControllerConfig cfg = s.resolved_controller();
  const WindModel wind(s.wind);
  const double T = s.sensor.sample_dt;
  const auto substeps = static_cast<int>(std::lround(T / s.dt_inner));
  const double h = T / substeps;
  const auto ticks = static_cast<std::size_t>(std::llround(s.duration / T));

  Sensor sensor(s.sensor, s.seed);
  CascadedController controller(cfg);
  Guidance guidance = make_guidance(s);
  KiteState state{s.initial_angles(), 0.0};
  ActuatorState actuator;
  controller.reset(state.angles.psi);
  RlsState rls = rls_initial(s.sysid.lambda);

  RunResult result;
  result.log.reserve(ticks);
  std::vector<LogSample> history;
  Outcome outcome = Outcome::Completed;
  std::string message;

  for (std::size_t k = 0; k < ticks; ++k) {
    try {
      const double t = static_cast<double>(k) * T;
      state.t = t;
      const double v0 = wind.speed_at(t);
      const StateRates rates = state_derivative(state, actuator.delta, s.aero, v0, s.plant);
      const Measurements m =
          sensor.sense(state, rates, airpath_speed(v0, s.aero.glide_ratio, state.angles.theta));

      LogRow row;
      row.t = t;
      row.phi = wrap_angle(state.angles.phi);
      row.theta = state.angles.theta;
      row.psi = wrap_angle(state.angles.psi);
      row.psi_m = wrap_angle(m.psi_m);
      row.psi_dot_m = m.psi_dot_m;
      row.v_a = m.v_a;
      row.v0 = v0;

      double delta_cmd = 0.0;
      std::visit(Overloaded{
                     [&](BangBangGuidance& g) {
                       delta_cmd = g.step(m.psi_m);
                       row.guidance_state = g.sign();
                       row.delta_ff = delta_cmd;
                     },
                     [&](auto& g) {
                       double psi_s = 0.0;
                       using G = std::decay_t<decltype(g)>;
                       if constexpr (std::is_same_v<G, PatternGuidance>) {
                         psi_s = g.step(m.phi_m);
                         row.guidance_state = g.state();
                       } else if constexpr (std::is_same_v<G, NeutralGuidance>) {
                         psi_s = g.step(m.phi_m);
                       } else {
                         psi_s = g.step(t);
                       }
                       const ControlOutput out = controller.step(psi_s, m);
                       delta_cmd = out.delta_cmd;
                       row.psi_s = wrap_angle(psi_s);
                       row.psi_c = wrap_angle(out.psi_c);
                       row.psi_dot_s = out.psi_dot_s;
                       row.psi_dot_c = out.psi_dot_c;
                       row.delta_ff = out.delta_ff;
                       row.delta_fbk = out.delta_fbk;
                     },
                 },
                 guidance);

      actuator = actuator_step(actuator, delta_cmd, s.actuator, T);
      row.delta = actuator.delta;

      history.push_back({row.t, row.phi, row.theta, row.psi, row.psi_dot_m, row.delta, row.v_a});
      if (s.sysid.enabled) {
        FlightLogRow sample;
        if (align_row(history, k, s.sensor.delay_steps, sample)) rls = rls_update(rls, sample, s.plant.va_min);
        row.g_hat = rls.g();
        row.M_hat = rls.M();
      } else {
        row.g_hat = cfg.g_hat;
        row.M_hat = cfg.M_hat;
      }
      result.log.push_back(row);

      for (int i = 0; i < substeps; ++i) state = integrate_step(state, actuator.delta, s.aero, wind, h, s.plant);
    } catch (const CrashError& e) {
      outcome = Outcome::Crash;
      message = e.what();
      break;
    } catch (const SimulationError& e) {
      outcome = Outcome::SingularState;
      message = e.what();
      break;
    }
  }

  result.summary = summarize(result.log, outcome, message);
  if (s.sysid.enabled) {
    try {
      result.summary.sysid = identify(result.log, s.sensor.delay_steps, s.sysid.lambda, true);
    } catch (const DegenerateRegressorError&) {
      // Too little excitation for the batch fit; report the online estimate alone.
      result.summary.sysid = SysidEstimate{rls.g(), rls.M(), 0.0, 0.0};
    }
  }
  return result;
}

RunSummary summarize(const std::vector<LogRow>& log, Outcome outcome, std::string message) {
  RunSummary s;
  s.outcome = outcome;
  s.message = std::move(message);
  s.rows = log.size();
  if (log.empty()) return s;

  s.theta_min = s.theta_max = log.front().theta;
  s.va_min = s.va_max = log.front().v_a;
  double tracking_sq = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    if (i > 0 && r.guidance_state != log[i - 1].guidance_state) ++s.transitions;
    s.theta_min = std::min(s.theta_min, r.theta);
    s.theta_max = std::max(s.theta_max, r.theta);
    s.va_min = std::min(s.va_min, r.v_a);
    s.va_max = std::max(s.va_max, r.v_a);
    s.peak_delta = std::max(s.peak_delta, std::abs(r.delta));
    s.peak_delta_ff = std::max(s.peak_delta_ff, std::abs(r.delta_ff));
    s.peak_delta_fbk = std::max(s.peak_delta_fbk, std::abs(r.delta_fbk));
    const double e = wrap_angle(r.psi_m - r.psi_c);
    tracking_sq += e * e;
  }
  s.psi_tracking_rms = std::sqrt(tracking_sq / static_cast<double>(log.size()));

  const double half = 0.5 * log.back().t;
  double ratio_sum = 0.0;
  std::size_t ratio_n = 0;
  for (const auto& r : log) {
    if (r.t < half || !(r.v0 > 0.0)) continue;
    ratio_sum += r.v_a / r.v0;
    ++ratio_n;
  }
  s.va_ratio = ratio_n > 0 ? ratio_sum / static_cast<double>(ratio_n) : 0.0;
  return s;
}

void write_csv(std::ostream& out, const std::vector<LogRow>& log) {
  out << kCsvHeader << '\n';
  std::string line;
  for (const auto& r : log) {
    line.clear();
    for (double v : {r.t, r.phi, r.theta, r.psi, r.psi_s, r.psi_c, r.psi_m, r.psi_dot_m, r.psi_dot_s, r.psi_dot_c,
                     r.delta, r.delta_ff, r.delta_fbk, r.v_a, r.v0}) {
      append_real(line, v);
      line += ',';
    }
    line += std::to_string(r.guidance_state);
    line += ',';
    append_real(line, r.g_hat);
    line += ',';
    append_real(line, r.M_hat);
    out << line << '\n';
  }
}

std::vector<LogRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty log", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected CSV header", 1);

  std::vector<LogRow> log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 18) throw ParseError("expected 18 columns, got " + std::to_string(cells.size()), line_no);
    LogRow r;
    double* targets[] = {&r.t,         &r.phi,       &r.theta,     &r.psi,   &r.psi_s,    &r.psi_c,
                         &r.psi_m,     &r.psi_dot_m, &r.psi_dot_s, &r.psi_dot_c, &r.delta, &r.delta_ff,
                         &r.delta_fbk, &r.v_a,       &r.v0};
    for (std::size_t i = 0; i < 15; ++i) *targets[i] = field_real(cells[i], line_no);
    r.guidance_state = static_cast<int>(std::lround(field_real(cells[15], line_no)));
    r.g_hat = field_real(cells[16], line_no);
    r.M_hat = field_real(cells[17], line_no);
    log.push_back(r);
  }
  return log;
}

std::vector<LogSample> to_samples(const std::vector<LogRow>& log) {
  std::vector<LogSample> out;
  out.reserve(log.size());
  for (const auto& r : log) out.push_back({r.t, r.phi, r.theta, r.psi, r.psi_dot_m, r.delta, r.v_a});
  return out;
}

SysidEstimate identify(const std::vector<LogRow>& log, int sensor_delay, double lambda, bool with_rls) {
  const auto rows = align_log(to_samples(log), sensor_delay);
  const GainFit gain = fit_gain_batch(rows);

  SysidEstimate est;
  est.batch_g_hat = gain.g_hat;
  est.batch_residual_rms = gain.residual_rms;
  if (with_rls) {
    RlsState rls = rls_initial(lambda);
    for (const auto& r : rows) rls = rls_update(rls, r);
    est.g_hat = rls.g();
    est.M_hat = rls.M();
  } else {
    try {
      const LawFit law = fit_law_batch(rows);
      est.g_hat = law.g_hat;
      est.M_hat = law.M_hat;
    } catch (const DegenerateRegressorError&) {
      est.g_hat = gain.g_hat;
      est.M_hat = 0.0;
    }
  }
  return est;
}

std::string summary_json(const RunSummary& s, std::string_view scenario_name) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name;
  j["outcome"] = to_string(s.outcome);
  if (!s.message.empty()) j["message"] = s.message;
  j["rows"] = s.rows;
  j["transitions"] = s.transitions;
  j["theta_min"] = s.theta_min;
  j["theta_max"] = s.theta_max;
  j["va_min"] = s.va_min;
  j["va_max"] = s.va_max;
  j["peak_delta"] = s.peak_delta;
  j["peak_delta_ff"] = s.peak_delta_ff;
  j["peak_delta_fbk"] = s.peak_delta_fbk;
  j["va_ratio"] = s.va_ratio;
  j["psi_tracking_rms"] = s.psi_tracking_rms;
  if (s.sysid) {
    j["sysid"] = {{"g_hat", s.sysid->g_hat},
                  {"M_hat", s.sysid->M_hat},
                  {"batch_g_hat", s.sysid->batch_g_hat},
                  {"batch_residual_rms", s.sysid->batch_residual_rms}};
  }
  return j.dump(2);
}

}  // namespace kitepilot
