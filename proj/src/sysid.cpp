#include "kitepilot/sysid.hpp"

#include <cmath>
#include <limits>

#include "kitepilot/errors.hpp"
#include "kitepilot/kinematics.hpp"

namespace kitepilot {

namespace {

std::array<double, 2> regressors(const FlightLogRow& row) {
  return {row.v_a * row.delta, row.gravity_proj / row.v_a};
}

}  // namespace

GainFit fit_gain_batch(std::span<const FlightLogRow> rows) {
  if (rows.size() < 2) throw DegenerateRegressorError("need at least two rows");
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double x = r.v_a * r.delta;
    sxx += x * x;
    sxy += x * r.psi_dot_m;
  }
  if (sxx / static_cast<double>(rows.size()) < 1e-12)
    throw DegenerateRegressorError("v_a * delta carries no variance");

  GainFit fit;
  fit.g_hat = sxy / sxx;
  double ss = 0.0;
  for (const auto& r : rows) {
    const double e = r.psi_dot_m - fit.g_hat * r.v_a * r.delta;
    ss += e * e;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(rows.size()));
  return fit;
}

std::array<double, 3> normal_matrix(std::span<const FlightLogRow> rows, double va_min) {
  std::array<double, 3> n{0.0, 0.0, 0.0};
  for (const auto& r : rows) {
    if (r.v_a < va_min) continue;
    const auto phi = regressors(r);
    n[0] += phi[0] * phi[0];
    n[1] += phi[0] * phi[1];
    n[2] += phi[1] * phi[1];
  }
  return n;
}

double condition_number(const std::array<double, 3>& sym) {
  const double mean = 0.5 * (sym[0] + sym[2]);
  const double half_diff = 0.5 * (sym[0] - sym[2]);
  const double radius = std::hypot(half_diff, sym[1]);
  const double lo = mean - radius;
  const double hi = mean + radius;
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

LawFit fit_law_batch(std::span<const FlightLogRow> rows, double va_min) {
  const auto n = normal_matrix(rows, va_min);
  double b0 = 0.0, b1 = 0.0;
  std::size_t used = 0;
  for (const auto& r : rows) {
    if (r.v_a < va_min) continue;
    const auto phi = regressors(r);
    b0 += phi[0] * r.psi_dot_m;
    b1 += phi[1] * r.psi_dot_m;
    ++used;
  }
  const double det = n[0] * n[2] - n[1] * n[1];
  if (used < 2 || !(std::abs(det) > 1e-12 * (n[0] * n[2] + 1e-300)))
    throw DegenerateRegressorError("normal matrix is singular");

  LawFit fit;
  fit.g_hat = (n[2] * b0 - n[1] * b1) / det;
  fit.M_hat = (n[0] * b1 - n[1] * b0) / det;
  double ss = 0.0;
  for (const auto& r : rows) {
    if (r.v_a < va_min) continue;
    const auto phi = regressors(r);
    const double e = r.psi_dot_m - fit.g_hat * phi[0] - fit.M_hat * phi[1];
    ss += e * e;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(used));
  return fit;
}

RlsState rls_initial(double lambda) {
  RlsState s;
  s.lambda = lambda;
  return s;
}

RlsState rls_from_batch(std::span<const FlightLogRow> rows, double lambda, double va_min) {
  const LawFit fit = fit_law_batch(rows, va_min);
  const auto n = normal_matrix(rows, va_min);
  const double det = n[0] * n[2] - n[1] * n[1];
  RlsState s;
  s.lambda = lambda;
  s.estimate = {fit.g_hat, fit.M_hat};
  s.covariance = {n[2] / det, -n[1] / det, -n[1] / det, n[0] / det};
  return s;
}

RlsState rls_update(const RlsState& state, const FlightLogRow& row, double va_min) {
  if (!(row.v_a >= va_min)) return state;
  const auto phi = regressors(row);
  const auto& P = state.covariance;

  const double p0 = P[0] * phi[0] + P[1] * phi[1];
  const double p1 = P[2] * phi[0] + P[3] * phi[1];
  const double denom = state.lambda + phi[0] * p0 + phi[1] * p1;
  const double k0 = p0 / denom;
  const double k1 = p1 / denom;
  const double error = row.psi_dot_m - (phi[0] * state.estimate[0] + phi[1] * state.estimate[1]);

  RlsState next = state;
  next.estimate[0] += k0 * error;
  next.estimate[1] += k1 * error;

  // P <- (P - k phi^T P) / lambda, where phi^T P = (P phi)^T by symmetry.
  const double inv = 1.0 / state.lambda;
  double a = (P[0] - k0 * p0) * inv;
  double b = (P[1] - k0 * p1) * inv;
  double c = (P[2] - k1 * p0) * inv;
  double d = (P[3] - k1 * p1) * inv;
  const double off = 0.5 * (b + c);
  next.covariance = {a, off, off, d};
  return next;
}

double min_covariance_eigenvalue(const RlsState& state) {
  const auto& P = state.covariance;
  const double off = 0.5 * (P[1] + P[2]);
  const double mean = 0.5 * (P[0] + P[3]);
  return mean - std::hypot(0.5 * (P[0] - P[3]), off);
}

bool align_row(std::span<const LogSample> log, std::size_t k, int sensor_delay, FlightLogRow& out) {
  const auto delay = static_cast<std::size_t>(sensor_delay);
  if (k >= log.size() || k < delay + 1) return false;
  const auto& now = log[k];
  const auto& sampled = log[k - delay];
  out.t = now.t;
  out.v_a = now.v_a;
  out.delta = log[k - delay - 1].delta;
  out.psi_dot_m = now.psi_dot_m;
  out.gravity_proj = gravity_projection({sampled.phi, sampled.theta, sampled.psi});
  return true;
}

std::vector<FlightLogRow> align_log(std::span<const LogSample> log, int sensor_delay) {
  std::vector<FlightLogRow> rows;
  FlightLogRow row;
  for (std::size_t k = 0; k < log.size(); ++k)
    if (align_row(log, k, sensor_delay, row)) rows.push_back(row);
  return rows;
}

}  // namespace kitepilot
