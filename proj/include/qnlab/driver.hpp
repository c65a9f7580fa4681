#pragma once

// The exact-linesearch loop:
//   p_k ← strategy(history); α_k = −g_kᵀp_k / p_kᵀHp_k;
//   x_{k+1} = x_k + α_k p_k;  g_{k+1} = g_k + α_k H p_k.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/qp.hpp"
#include "qnlab/strategies.hpp"

namespace qnlab {

struct RunOptions {
  /// Gradient-norm threshold. When unset: 1e-8·max(1, ‖g0‖) in double and an
  /// absolute 1e-30 in big-float mode.
  std::optional<double> tol;
  /// Scale tol by max(1, ‖g0‖).
  bool tol_relative = false;
  /// Iteration cap; 0 means 5n.
  std::size_t max_iter = 0;
  ScalarMode mode = ScalarMode::native();
  /// Record cos(p_k, p_k^PCG) against a PCG recurrence on the run's gradients.
  bool record_oracle_angle = false;
  bool record_iterates = false;
  bool record_error = true;
  bool record_timing = false;

  void validate() const;
  /// The absolute threshold for a run whose initial gradient has norm g0_norm.
  double threshold(double g0_norm) const;
  std::size_t cap(std::size_t n) const { return max_iter == 0 ? 5 * n : max_iter; }
};

enum class RunStatus { converged, max_iter, breakdown };

std::string to_string(RunStatus s);

struct TraceRow {
  std::size_t iter = 0;
  double grad_norm = 0.0;
  double err_norm = 0.0;
  /// −g_kᵀp_k / g_kᵀB0⁻¹g_k, which is δ_k for PCG-parallel methods.
  std::optional<double> delta_k;
  std::optional<double> cos_to_pcg;
  std::int64_t wall_ns = 0;
};

struct Trace {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::max_iter;
  std::string reason;
  std::size_t breakdown_iter = 0;
  /// Number of steps taken.
  std::size_t iterations = 0;
  double threshold = 0.0;
  /// x_0, x_1, … in double, when recorded.
  std::vector<Vector<double>> iterates;
  /// max_k (1 − cos(p_k, p_k^PCG)) evaluated in the run's scalar type.
  std::optional<double> max_one_minus_cos;

  double final_grad_norm() const { return rows.empty() ? 0.0 : rows.back().grad_norm; }
};

template <class T>
struct RunResult {
  Trace trace;
  IterHistory<T> history;
};

/// Runs in scalar type T; the caller must hold a matching PrecisionScope for
/// BigFloat (see with_scalar).
template <class T>
RunResult<T> run(const QuadraticProblem& problem, const StrategyConfig& config, const Vector<double>& x0,
                 const RunOptions& opts);

/// Dispatches on opts.mode and returns only the trace.
Trace run_trace(const QuadraticProblem& problem, const StrategyConfig& config, const Vector<double>& x0,
                const RunOptions& opts);

/// Initial point: zero, or standard normal from the given seed.
Vector<double> initial_point(std::size_t n, bool random, std::uint64_t seed);

}  // namespace qnlab
