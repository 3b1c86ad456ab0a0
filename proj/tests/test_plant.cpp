#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kitepilot/errors.hpp"
#include "kitepilot/plant.hpp"

using namespace kitepilot;
using doctest::Approx;

namespace {

const double kZenith = std::atan(5.0);

KiteState run_hold(KiteState s, const AeroParams& p, const WindModel& wind, double duration, double dt,
                   double delta) {
  const int steps = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i < steps; ++i) s = integrate_step(s, delta, p, wind, dt);
  return s;
}

}  // namespace

TEST_CASE("state_derivative examples") {
  const AeroParams p;  // E=5, g=0.04, L=300, M=0
  SUBCASE("zenith equilibrium") {
    const StateRates r = state_derivative({{0.3, kZenith, 0}, 0}, 0.0, p, 8.0);
    CHECK(std::abs(r.psi_dot) <= 1e-15);
    CHECK(std::abs(r.theta_dot) <= 1e-15);
    CHECK(std::abs(r.phi_dot) <= 1e-15);
  }
  SUBCASE("theta rate at psi = pi/2") {
    const StateRates r = state_derivative({{0, kZenith, std::numbers::pi / 2}, 0}, 0.0, p, 8.0);
    CHECK(r.theta_dot == Approx(8.0 / 300 * (-5 / std::sqrt(26.0))));
    CHECK(r.theta_dot == Approx(-0.02615).epsilon(1e-3));
  }
  SUBCASE("turn-rate law plus kinematic correction") {
    const KiteState s{{0, 1.0, 0.4}, 0};
    const StateRates r = state_derivative(s, 0.3, p, 8.0);
    const double v_a = 8 * 5 * std::cos(1.0);
    CHECK(r.psi_dot - r.phi_dot * std::cos(1.0) == Approx(0.04 * v_a * 0.3));
    PlantLimits raw;
    raw.rate_correction = false;
    CHECK(state_derivative(s, 0.3, p, 8.0, raw).psi_dot == Approx(0.04 * v_a * 0.3));
  }
  SUBCASE("mass term") {
    AeroParams pm = p;
    pm.mass_term = 2.0;
    PlantLimits raw;
    raw.rate_correction = false;
    const Angles a{0, 1.0, 0.3};
    const double v_a = 8 * 5 * std::cos(1.0);
    CHECK(state_derivative({a, 0}, 0.0, pm, 8.0, raw).psi_dot ==
          Approx(2.0 * std::cos(1.0) * std::sin(0.3) / v_a));
  }
}

TEST_CASE("state_derivative errors") {
  AeroParams p;
  CHECK_THROWS_AS(state_derivative({{0, 0.005, 0}, 0}, 0, p, 8), SingularStateError);
  CHECK_NOTHROW(state_derivative({{0, 0.011, 0}, 0}, 0, p, 8));

  // v_a = v0 E cos(theta) ~ 0 close to pi/2.
  const KiteState upright{{0, std::numbers::pi / 2 - 1e-4, 0.1}, 0};
  CHECK_NOTHROW(state_derivative(upright, 0, p, 8));
  p.mass_term = 1.0;
  CHECK_THROWS_AS(state_derivative(upright, 0, p, 8), DegenerateWindError);
}

TEST_CASE("actuator_step") {
  const ActuatorParams ap{0.4};
  CHECK(actuator_step({0.0}, 1.0, ap, 0.1).delta == Approx(0.04));
  CHECK(actuator_step({0.5}, 0.5, ap, 0.1).delta == Approx(0.5));
  CHECK(actuator_step({0.5}, 0.5, ap, 7.0).delta == Approx(0.5));
  CHECK(actuator_step({0.0}, 2.0, ap, 10.0).delta == Approx(1.0));
  CHECK(actuator_step({0.3}, 0.32, ap, 0.1).delta == Approx(0.32));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cmd(-2, 2);
  ActuatorState a;
  for (int i = 0; i < 2000; ++i) {
    const ActuatorState next = actuator_step(a, cmd(rng), ap, 0.1);
    CHECK(std::abs(next.delta) <= 1.0);
    CHECK(std::abs(next.delta - a.delta) <= 0.04 + 1e-12);
    a = next;
  }
}

TEST_CASE("integrate_step") {
  const AeroParams p;
  const WindModel wind;

  SUBCASE("equilibrium stays fixed") {
    KiteState s{{0.2, kZenith, 0}, 0};
    for (int i = 0; i < 100; ++i) {
      const KiteState next = integrate_step(s, 0.0, p, wind, 0.01);
      CHECK(std::abs(next.angles.theta - s.angles.theta) <= 1e-12);
      CHECK(std::abs(next.angles.phi - s.angles.phi) <= 1e-12);
      CHECK(std::abs(next.angles.psi - s.angles.psi) <= 1e-12);
      s = next;
    }
  }

  SUBCASE("fourth-order step halving") {
    const KiteState start{{0.1, 0.9, 0.6}, 0};
    const KiteState coarse = run_hold(start, p, wind, 10.0, 0.01, 0.2);
    const KiteState fine = run_hold(start, p, wind, 10.0, 0.005, 0.2);
    CHECK(std::abs(coarse.angles.theta - fine.angles.theta) < 1e-8);
    CHECK(std::abs(coarse.angles.phi - fine.angles.phi) < 1e-8);
    CHECK(std::abs(coarse.angles.psi - fine.angles.psi) < 1e-8);
    // Error ratio of successive halvings approaches 2^4.
    const KiteState big = run_hold(start, p, wind, 10.0, 0.2, 0.2);
    const KiteState mid = run_hold(start, p, wind, 10.0, 0.1, 0.2);
    const KiteState small = run_hold(start, p, wind, 10.0, 0.05, 0.2);
    const double ratio = std::abs(big.angles.psi - mid.angles.psi) / std::abs(mid.angles.psi - small.angles.psi);
    CHECK(ratio == Approx(16.0).epsilon(0.15));
  }

  SUBCASE("psi = 0 hold converges monotonically to arctan E") {
    KiteState s{{0, 0.8, 0}, 0};
    double previous = s.angles.theta;
    for (int i = 0; i < 30000; ++i) {
      s = integrate_step(s, 0.0, p, wind, 0.01);
      CHECK(s.angles.theta >= previous - 1e-15);
      CHECK(s.angles.theta <= kZenith + 1e-12);
      previous = s.angles.theta;
    }
    CHECK(s.angles.theta == Approx(kZenith).epsilon(1e-6));
  }

  SUBCASE("crash below the elevation threshold") {
    // Constant psi beyond pi/2 drives theta toward the wind axis.
    KiteState s{{0, 0.2, 2.5}, 0};
    CHECK_THROWS_AS(run_hold(s, p, wind, 300, 0.01, 0.0), CrashError);
  }

  SUBCASE("singular state when crash supervision is off") {
    PlantLimits limits;
    limits.crash_elevation = -2.0;
    // psi = pi keeps phi fixed while theta falls through zero.
    KiteState s{{0, 0.2, std::numbers::pi}, 0};
    auto run = [&] {
      for (int i = 0; i < 100000; ++i) s = integrate_step(s, 0.0, p, wind, 0.01, limits);
    };
    CHECK_THROWS_AS(run(), SingularStateError);
  }
}

TEST_CASE("steady-state circle at constant psi") {
  const AeroParams p;
  const WindModel wind;
  // The orbit sweeps the full azimuth, so crash supervision is off.
  PlantLimits limits;
  limits.crash_elevation = -2.0;
  for (double psi0 : {0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0}) {
    CAPTURE(psi0);
    KiteState s{{0, 1.2, psi0}, 0};
    for (int i = 0; i < 12000; ++i) s = integrate_step(s, hold_deflection(s, p, 8.0), p, wind, 0.01, limits);
    CHECK(std::abs(s.angles.psi - psi0) < 1e-4);
    CHECK(std::abs(s.angles.theta - std::atan(5 * std::cos(psi0))) < 1e-3);

    // Circular orbit: phi_dot settles to a constant.
    const double rate_a = state_derivative(s, hold_deflection(s, p, 8.0), p, 8.0).phi_dot;
    for (int i = 0; i < 1000; ++i) s = integrate_step(s, hold_deflection(s, p, 8.0), p, wind, 0.01, limits);
    const double rate_b = state_derivative(s, hold_deflection(s, p, 8.0), p, 8.0).phi_dot;
    CHECK(std::abs(rate_a - rate_b) < 1e-4);
  }
}

TEST_CASE("mass term destabilizes the zenith") {
  AeroParams p;
  p.mass_term = 2.0;
  const WindModel wind;
  KiteState s{{0, kZenith, 0.01}, 0};
  double previous = s.angles.psi;
  for (int i = 0; i < 1000; ++i) {
    s = integrate_step(s, 0.0, p, wind, 0.01);
    CHECK(s.angles.psi > previous);
    previous = s.angles.psi;
  }
  CHECK(s.angles.psi > 0.015);
}

TEST_CASE("wind model") {
  WindModel::Params wp;
  wp.mean = 1.0;
  wp.gust_amplitude = 2.0;
  wp.turbulence = 3.0;
  wp.seed = 9;
  const WindModel a(wp), b(wp);
  for (double t = 0; t < 200; t += 0.37) {
    CHECK(a.speed_at(t) >= 0.0);
    CHECK(a.speed_at(t) == b.speed_at(t));
  }
  CHECK(WindModel{}.speed_at(12.3) == 8.0);
}

TEST_CASE("sensor") {
  const AeroParams p;
  SUBCASE("noise-free and undelayed") {
    SensorParams sp;
    sp.delay_steps = 0;
    Sensor sensor(sp, 1);
    const KiteState s{{0.2, 1.1, -0.3}, 4.0};
    const StateRates r = state_derivative(s, 0.1, p, 8.0);
    const Measurements m = sensor.sense(s, r, 12.0);
    CHECK(m.psi_m == s.angles.psi);
    CHECK(m.phi_m == s.angles.phi);
    CHECK(m.theta_m == s.angles.theta);
    CHECK(m.v_a == 12.0);
    CHECK(m.psi_dot_m == Approx(measured_yaw_rate(r.psi_dot, r.phi_dot, 1.1)));
    CHECK(m.gravity_proj == Approx(gravity_projection(s.angles)));
  }
  SUBCASE("gyro correction") {
    SensorParams sp;
    sp.delay_steps = 0;
    Sensor sensor(sp, 1);
    const Measurements m = sensor.sense({{0, std::numbers::pi / 3, 0}, 0}, {0.4, 0.0, 0.1}, 10.0);
    CHECK(m.psi_dot_m == Approx(0.35));
  }
  SUBCASE("three-sample FIFO at 10 Hz") {
    SensorParams sp;
    sp.delay_steps = 3;
    Sensor sensor(sp, 1);
    for (int k = 0; k < 20; ++k) {
      const double t = 0.1 * k;
      const KiteState s{{0, 1.0, std::sin(t)}, t};
      const Measurements m = sensor.sense(s, {}, 10.0);
      const double expected_t = std::max(0.0, t - 0.3);
      CHECK(m.t == Approx(expected_t));
      CHECK(m.psi_m == Approx(std::sin(expected_t)));
    }
  }
  SUBCASE("noise statistics") {
    SensorParams sp;
    sp.delay_steps = 0;
    sp.sigma_psi_dot = 0.02;
    Sensor sensor(sp, 42);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double e = sensor.sense({{0, 1.0, 0}, 0}, {}, 10.0).psi_dot_m;
      sum += e;
      sq += e * e;
    }
    CHECK(std::abs(sum / n) < 0.001);
    CHECK(std::sqrt(sq / n) == Approx(0.02).epsilon(0.03));
  }
}
