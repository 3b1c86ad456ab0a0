// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances are fixed here and never scaled.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kitepilot/controller.hpp"
#include "kitepilot/kinematics.hpp"
#include "kitepilot/plant.hpp"
#include "kitepilot/runner.hpp"
#include "kitepilot/scenario.hpp"
#include "kitepilot/sysid.hpp"

using namespace kitepilot;

namespace {

struct Verdict {
  bool passed;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string csv_of(const std::vector<LogRow>& log) {
  std::ostringstream out;
  write_csv(out, log);
  return out.str();
}

// Plant held at constant psi by the exact hold deflection on every RK4 step.
// The resulting circular orbit sweeps the azimuth, so crash supervision is off.
Verdict steady_state_law() {
  const AeroParams p;
  const WindModel wind;
  PlantLimits limits;
  limits.crash_elevation = -2.0;
  double worst_err = 0.0, worst_time = 0.0;
  for (double psi0 : {0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0}) {
    const auto start = std::chrono::steady_clock::now();
    KiteState s{{0.0, std::atan(p.glide_ratio), psi0}, 0.0};
    for (int i = 0; i < 12000; ++i)
      s = integrate_step(s, hold_deflection(s, p, wind.speed_at(s.t)), p, wind, 0.01, limits);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    worst_err = std::max(worst_err, std::abs(s.angles.theta - std::atan(p.glide_ratio * std::cos(psi0))));
    worst_time = std::max(worst_time, seconds);
  }
  return {worst_err < 1e-3 && worst_time < 5.0,
          fmt("7 cases, 120 s each: worst |theta - arctan(E cos psi0)| = %.2e rad, slowest case %.3f s", worst_err,
              worst_time)};
}

Verdict closure() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> phi(-1.4, 1.4), theta(0.02, 1.55), psi(-3.14, 3.14), v0(1, 25), E(1.5, 10);
  double cond = 0.0, speed = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Angles a{phi(rng), theta(rng), psi(rng)};
    const double w = v0(rng), e = E(rng);
    const Vec3 va = airflow_vector(w, velocity_components(w, e, a), a);
    const BodyAxes b = basis_vectors(a);
    cond = std::max({cond, std::abs(dot(b.pitch, va)), std::abs(dot(b.roll, va) - e * dot(b.yaw, va))});
    speed = std::max(speed, std::abs(-dot(va, b.roll) - w * e * std::cos(a.theta)));
  }
  return {cond <= 1e-10 && speed <= 1e-12,
          fmt("1000 random states: flight conditions %.2e (tol 1e-10), air path speed %.2e (tol 1e-12)", cond, speed)};
}

Verdict turn_rate_recovery() {
  bool ok = true;
  std::string detail;
  double worst_rls = 0.0;
  for (double g : {0.03, 0.04, 0.05}) {
    Scenario s;
    s.mode = Mode::BangBang;
    s.duration = 120.0;
    s.aero.steer_gain = g;
    s.sensor.sigma_psi_dot = 0.02;
    const RunResult r = run_scenario(s);
    if (r.summary.outcome != Outcome::Completed)
      return {false, fmt("g=%.2f run ended: %s", g, r.summary.message.c_str())};
    const auto rows = align_log(to_samples(r.log), s.sensor.delay_steps);
    const GainFit fit = fit_gain_batch(rows);
    const double rel = std::abs(fit.g_hat - g) / g;
    ok = ok && rel <= 0.03;
    detail += fmt("g=%.2f: g_hat=%.5f (%.2f%%); ", g, fit.g_hat, 100 * rel);

    const LawFit ols = fit_law_batch(rows);
    RlsState rls = rls_from_batch(std::span<const FlightLogRow>(rows).first(10), 1.0);
    for (std::size_t i = 10; i < rows.size(); ++i) rls = rls_update(rls, rows[i]);
    worst_rls = std::max({worst_rls, std::abs(rls.g() - ols.g_hat), std::abs(rls.M() - ols.M_hat)});
  }
  ok = ok && worst_rls <= 1e-8;
  return {ok, detail + fmt("RLS(lambda=1) vs OLS %.2e (tol 1e-8)", worst_rls)};
}

Verdict model_following() {
  Scenario s;
  s.mode = Mode::Pattern;
  s.duration = 120.0;
  const RunResult r = run_scenario(s);
  if (r.summary.outcome != Outcome::Completed) return {false, "run ended: " + r.summary.message};
  double peak_ff = 0.0, peak_fbk = 0.0;
  bool split = true;
  for (const auto& row : r.log) {
    peak_ff = std::max(peak_ff, std::abs(row.delta_ff));
    peak_fbk = std::max(peak_fbk, std::abs(row.delta_fbk));
    split = split && std::abs(row.delta_ff) <= 0.6 + 1e-12 && std::abs(row.delta_fbk) <= 0.4 + 1e-12;
  }
  return {peak_fbk <= 0.15 * peak_ff && split,
          fmt("peak |delta_fbk| = %.2e, peak |delta_ff| = %.3f, ratio %.2e (tol 0.15); split %s", peak_fbk, peak_ff,
              peak_fbk / peak_ff, split ? "held" : "violated")};
}

Verdict shaping() {
  ControllerConfig cfg;
  double worst = 0.0;
  for (double K : {0.2, 0.4, 0.8, 1.6})
    for (double step : {0.1, 0.5, 1.0, 1.4}) {
      PsiFeedforward ff(cfg);
      ff.reset(0.0);
      double peak = 0.0;
      for (int k = 0; k < 600; ++k) peak = std::max(peak, ff.step(step, K).psi_c);
      worst = std::max(worst, peak / step);
    }

  Scenario s;
  s.duration = 60.0;
  s.step.amplitude = 1.0;
  s.step.start_time = 2.0;
  s.step.period = 20.0;
  const RunResult r = run_scenario(s);
  if (r.summary.outcome != Outcome::Completed) return {false, "loop run ended: " + r.summary.message};
  return {worst <= 1.02 && r.summary.psi_tracking_rms < 0.05,
          fmt("worst max(psi_c)/psi_s = %.4f (tol 1.02); loop rms(psi_m - psi_c) = %.4f rad (tol 0.05)", worst,
              r.summary.psi_tracking_rms)};
}

Verdict pattern() {
  Scenario s;
  s.mode = Mode::Pattern;
  s.duration = 300.0;
  const RunResult r = run_scenario(s);
  if (r.summary.outcome != Outcome::Completed) return {false, "run ended: " + r.summary.message};

  bool alternating = true;
  double lo = r.log.front().phi, hi = lo;
  for (std::size_t i = 1; i < r.log.size(); ++i) {
    const int a = r.log[i - 1].guidance_state, b = r.log[i].guidance_state;
    alternating = alternating && (a == b || a + b == 3);
    lo = std::min(lo, r.log[i].phi);
    hi = std::max(hi, r.log[i].phi);
  }
  const bool covers = lo <= s.pattern.phi_0 - s.pattern.phi_a && hi >= s.pattern.phi_0 + s.pattern.phi_a;
  const double ratio = r.summary.va_ratio, peak = r.summary.peak_delta;
  const bool ok = r.summary.transitions >= 10 && alternating && covers && ratio >= 2.0 && ratio <= 5.0 &&
                  peak >= 0.4 && peak <= 0.7;
  return {ok, fmt("%d transitions (min 10), phi in [%.3f, %.3f] vs band [%.3f, %.3f], v_a/v0 = %.2f (2..5), "
                  "peak |delta| = %.3f (0.4..0.7)",
                  r.summary.transitions, lo, hi, s.pattern.phi_0 - s.pattern.phi_a, s.pattern.phi_0 + s.pattern.phi_a,
                  ratio, peak)};
}

Verdict mass_term() {
  const double M = 2.0;
  AeroParams p;
  p.mass_term = M;
  const WindModel wind;
  KiteState s{{0.0, std::atan(p.glide_ratio), 0.01}, 0.0};
  bool monotonic = true;
  double previous = std::abs(s.angles.psi);
  for (int i = 0; i < 1000; ++i) {
    s = integrate_step(s, 0.0, p, wind, 0.01);
    monotonic = monotonic && std::abs(s.angles.psi) > previous;
    previous = std::abs(s.angles.psi);
  }
  const double open_loop = std::abs(s.angles.psi);

  Scenario c;
  c.duration = 60.0;
  c.aero.mass_term = M;
  c.step.amplitude = 0.0;
  c.initial.psi = 0.01;
  const RunResult r = run_scenario(c);
  if (r.summary.outcome != Outcome::Completed) return {false, "closed loop ended: " + r.summary.message};
  double worst = 0.0;
  for (const auto& row : r.log) worst = std::max(worst, std::abs(row.psi_m));
  return {monotonic && worst < 0.05,
          fmt("M=%.1f, delta=0: |psi| 0.010 -> %.4f rad in 10 s, %s; with T1 max |psi_m| = %.2e rad over 60 s "
              "(tol 0.05)",
              M, open_loop, monotonic ? "monotonic" : "not monotonic", worst)};
}

Verdict numerics() {
  const AeroParams p;
  const WindModel wind;
  auto run = [&](double dt) {
    KiteState s{{0.1, 0.9, 0.6}, 0.0};
    const int steps = static_cast<int>(std::lround(10.0 / dt));
    for (int i = 0; i < steps; ++i) s = integrate_step(s, 0.2, p, wind, dt);
    return s.angles;
  };
  const Angles a = run(0.01), b = run(0.005);
  const double halving =
      std::max({std::abs(a.phi - b.phi), std::abs(a.theta - b.theta), std::abs(a.psi - b.psi)});

  Scenario s;
  s.mode = Mode::Pattern;
  s.duration = 60.0;
  s.sensor.sigma_psi = 0.01;
  s.sensor.sigma_psi_dot = 0.02;
  s.wind.turbulence = 0.5;
  const bool identical = csv_of(run_scenario(s).log) == csv_of(run_scenario(s).log);
  return {halving < 1e-8 && identical,
          fmt("step halving over 10 s: %.2e rad (tol 1e-8); repeated seeded run %s", halving,
              identical ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"steady-state orientation law", steady_state_law},
      {"flight-condition closure", closure},
      {"turn-rate law recovery", turn_rate_recovery},
      {"model-following quality", model_following},
      {"shaping without overshoot", shaping},
      {"figure-eight pattern generation", pattern},
      {"mass-term instability and compensation", mass_term},
      {"numerics and determinism", numerics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.passed ? 0 : 1;
    std::printf("%s  %zu  %s: %s\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
