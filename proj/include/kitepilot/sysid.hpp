// Identification of the turn-rate law psi_dot_m = g v_a delta + M G / v_a
// from flight logs: batch least squares and exponentially forgetting RLS.
#pragma once

#include <array>
#include <span>
#include <vector>

namespace kitepilot {

struct FlightLogRow {
  double t = 0.0;
  double v_a = 0.0;
  double delta = 0.0;
  double psi_dot_m = 0.0;
  double gravity_proj = 0.0;
};

struct GainFit {
  double g_hat = 0.0;
  double residual_rms = 0.0;
};

/// Slope of psi_dot_m over v_a * delta through the origin.
/// Throws DegenerateRegressorError when sum (v_a delta)^2 / n < 1e-12.
GainFit fit_gain_batch(std::span<const FlightLogRow> rows);

struct LawFit {
  double g_hat = 0.0;
  double M_hat = 0.0;
  double residual_rms = 0.0;
};

/// Two-regressor ordinary least squares on (v_a delta, G / v_a). Rows with
/// v_a < va_min are skipped. Throws DegenerateRegressorError when the normal
/// matrix is singular.
LawFit fit_law_batch(std::span<const FlightLogRow> rows, double va_min = 0.5);

/// Symmetric 2x2 normal matrix sum phi phi^T, stored as {a, b, c} for [[a, b], [b, c]].
std::array<double, 3> normal_matrix(std::span<const FlightLogRow> rows, double va_min = 0.5);

/// Ratio of the largest to smallest eigenvalue of a symmetric 2x2 matrix.
double condition_number(const std::array<double, 3>& sym);

struct RlsState {
  std::array<double, 2> estimate{0.03, 0.0};           // (g, M)
  std::array<double, 4> covariance{10.0, 0.0, 0.0, 10.0};  // row-major 2x2
  double lambda = 0.995;

  double g() const { return estimate[0]; }
  double M() const { return estimate[1]; }
};

/// Default prior: estimate (0.03, 0), covariance 10 I.
RlsState rls_initial(double lambda = 0.995);

/// Prior equal to the batch solution over rows, with covariance
/// (sum phi phi^T)^-1. Subsequent updates with lambda = 1 then reproduce batch
/// least squares over all rows exactly.
RlsState rls_from_batch(std::span<const FlightLogRow> rows, double lambda, double va_min = 0.5);

/// One forgetting-factor RLS update. Returns the input unchanged when
/// row.v_a < va_min.
RlsState rls_update(const RlsState& state, const FlightLogRow& row, double va_min = 0.5);

/// Smallest eigenvalue of the (symmetrized) covariance.
double min_covariance_eigenvalue(const RlsState& state);

/// Builds regression rows from a controller-rate log. The gyro sample at row k
/// was taken sensor_delay samples earlier and reflects the deflection held
/// during the preceding sample interval, so delta is taken from row
/// k - sensor_delay - 1. gravity_proj is recomputed from the true angles at
/// row k - sensor_delay.
struct LogSample {
  double t, phi, theta, psi, psi_dot_m, delta, v_a;
};
std::vector<FlightLogRow> align_log(std::span<const LogSample> log, int sensor_delay);

/// Single-row form of align_log for online use; false while k is too early.
bool align_row(std::span<const LogSample> log, std::size_t k, int sensor_delay, FlightLogRow& out);

}  // namespace kitepilot
