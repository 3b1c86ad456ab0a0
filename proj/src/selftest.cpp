#include "kitepilot/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "kitepilot/controller.hpp"
#include "kitepilot/kinematics.hpp"
#include "kitepilot/plant.hpp"
#include "kitepilot/runner.hpp"
#include "kitepilot/sysid.hpp"

namespace kitepilot {

namespace {

constexpr int kSamples = 1000;

Angles random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phi(-1.2, 1.2);
  std::uniform_real_distribution<double> theta(0.05, std::numbers::pi / 2);
  std::uniform_real_distribution<double> psi(-std::numbers::pi, std::numbers::pi);
  return {phi(rng), theta(rng), psi(rng)};
}

std::string worst(double value) {
  std::ostringstream s;
  s << "worst " << value;
  return s.str();
}

CheckResult basis_orthonormal() {
  std::mt19937_64 rng(11);
  double err = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const BodyAxes b = basis_vectors(random_angles(rng));
    err = std::max({err, std::abs(norm(b.roll) - 1), std::abs(norm(b.pitch) - 1), std::abs(norm(b.yaw) - 1),
                    std::abs(dot(b.roll, b.pitch)), std::abs(dot(b.pitch, b.yaw)), std::abs(dot(b.roll, b.yaw)),
                    norm(cross(b.roll, b.pitch) - b.yaw)});
  }
  return {"body axes orthonormal and right-handed", err <= 1e-12, worst(err)};
}

CheckResult rotation_consistency() {
  std::mt19937_64 rng(12);
  double err = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const Angles a = random_angles(rng);
    const Mat3 R = rotation_matrix(a);
    const BodyAxes b = basis_vectors(a);
    err = std::max({err, norm(R * (-kUnitZ) - b.roll), norm(R * (-kUnitX) - b.yaw),
                    std::abs(R.determinant() - 1.0)});
  }
  return {"rotation matrix reproduces roll and yaw axes", err <= 1e-12, worst(err)};
}

CheckResult flight_conditions() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> wind(2.0, 20.0);
  std::uniform_real_distribution<double> glide(2.0, 8.0);
  double err = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const Angles a = random_angles(rng);
    const double v0 = wind(rng), E = glide(rng);
    const Vec3 va = airflow_vector(v0, velocity_components(v0, E, a), a);
    const BodyAxes b = basis_vectors(a);
    err = std::max({err, std::abs(dot(b.pitch, va)), std::abs(dot(b.roll, va) - E * dot(b.yaw, va)),
                    std::abs(-dot(va, b.roll) - airpath_speed(v0, E, a.theta))});
  }
  return {"airflow satisfies both flight conditions", err <= 1e-10, worst(err)};
}

CheckResult steady_state_root() {
  double err = 0.0;
  for (double E : {2.0, 4.0, 5.0, 8.0})
    for (double psi = -1.5; psi <= 1.5; psi += 0.1)
      err = std::max(err, std::abs(std::cos(psi) - std::tan(steady_state_theta(psi, E)) / E));
  return {"steady-state theta zeroes the theta rate", err <= 1e-12, worst(err)};
}

CheckResult equilibrium_hold() {
  const AeroParams p;
  const WindModel wind;
  KiteState s{{0.2, steady_state_theta(0.0, p.glide_ratio), 0.0}, 0.0};
  const KiteState start = s;
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    s = integrate_step(s, 0.0, p, wind, 0.01);
    err = std::max({err, std::abs(s.angles.theta - start.angles.theta), std::abs(s.angles.phi - start.angles.phi),
                    std::abs(s.angles.psi)});
  }
  return {"zenith equilibrium is stationary", err <= 1e-10, worst(err)};
}

CheckResult shaping_no_overshoot() {
  ControllerConfig cfg;
  cfg.delay_n = 0;
  double overshoot = 0.0;
  for (double K : {0.3, 0.8, 1.5, 3.0})
    for (double step : {0.1, 0.5, 1.0, 2.0}) {
      PsiFeedforward ff(cfg);
      ff.reset(0.0);
      double peak = 0.0;
      for (int i = 0; i < 600; ++i) peak = std::max(peak, ff.step(step, K).psi_c);
      overshoot = std::max(overshoot, peak / step - 1.0);
    }
  return {"feedforward shaping overshoot below 2%", overshoot <= 0.02, worst(overshoot)};
}

CheckResult rls_matches_batch() {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> va(5.0, 40.0), delta(-0.6, 0.6), grav(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<FlightLogRow> rows;
  for (int i = 0; i < 600; ++i) {
    FlightLogRow r{0.1 * i, va(rng), delta(rng), 0.0, grav(rng)};
    r.psi_dot_m = 0.04 * r.v_a * r.delta + 1.5 * r.gravity_proj / r.v_a + noise(rng);
    rows.push_back(r);
  }
  const LawFit batch = fit_law_batch(rows);
  RlsState rls = rls_from_batch(std::span(rows).first(10), 1.0);
  for (std::size_t i = 10; i < rows.size(); ++i) rls = rls_update(rls, rows[i]);
  const double err = std::max(std::abs(rls.g() - batch.g_hat), std::abs(rls.M() - batch.M_hat));
  return {"RLS with lambda 1 equals batch least squares", err <= 1e-8, worst(err)};
}

CheckResult deterministic_run() {
  Scenario s;
  s.mode = Mode::Pattern;
  s.duration = 20.0;
  s.sensor.sigma_psi_dot = 0.02;
  s.wind.turbulence = 0.5;
  std::ostringstream a, b;
  write_csv(a, run_scenario(s).log);
  write_csv(b, run_scenario(s).log);
  return {"identical seeds give identical telemetry", a.str() == b.str(), ""};
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  const std::vector<std::function<CheckResult()>> checks = {
      basis_orthonormal, rotation_consistency, flight_conditions,  steady_state_root,
      equilibrium_hold,  shaping_no_overshoot, rls_matches_batch, deterministic_run,
  };
  std::vector<CheckResult> results;
  for (const auto& check : checks) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({"(check threw)", false, e.what()});
    }
  }
  return results;
}

bool report(std::ostream& out, const std::vector<CheckResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name;
    if (!r.detail.empty()) out << "  (" << r.detail << ')';
    out << '\n';
    ok = ok && r.passed;
  }
  return ok;
}

}  // namespace kitepilot
