#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "qnlab/driver.hpp"

namespace qnlab::testing {

/// H = diag(1, 2), c = (−1, −2); x* = (1, 1).
inline QuadraticProblem hand_problem() {
  Matrix<double> h(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 2.0;
  return QuadraticProblem(h, {-1.0, -2.0});
}

inline QuadraticProblem random_problem(std::size_t n, double cond, std::uint64_t seed) {
  SpectrumSpec spec;
  spec.n = n;
  spec.cond_target = cond;
  spec.seed = seed;
  return make_random_qp(spec);
}

/// Runs at most `steps` iterations from x0 = 0 with an explicit threshold
/// (opts.mode only picks the default one). The caller holds the
/// PrecisionScope for BigFloat.
template <class T>
RunResult<T> run_steps(const QuadraticProblem& qp, const StrategyConfig& cfg, std::size_t steps,
                       double tol = 1e-300) {
  RunOptions opts;
  opts.tol = tol;
  opts.max_iter = steps;
  return run<T>(qp, cfg, Vector<double>(qp.n, 0.0), opts);
}

/// Recursive Broyden run with φ_i drawn uniformly in [phi_lo, phi_hi]; the
/// history holds every step taken before convergence or breakdown.
inline RunResult<double> broyden_history(std::size_t n, double cond, std::uint64_t seed, std::size_t steps,
                                         double phi_lo = -1.0, double phi_hi = 1.0) {
  std::mt19937_64 gen(seed * 7919 + 17);
  std::uniform_real_distribution<double> dist(phi_lo, phi_hi);
  std::vector<double> phis(steps);
  for (auto& v : phis) v = dist(gen);
  StrategyConfig cfg;
  cfg.family = Family::broyden;
  cfg.phi = PhiSchedule::sequence(phis);
  return run_steps<double>(random_problem(n, cond, seed), cfg, steps);
}

/// The history truncated to its first k steps (latest index k).
template <class T>
IterHistory<T> prefix(const IterHistory<T>& h, std::size_t k) {
  IterHistory<T> out(h.b0());
  out.start(h.x(0), h.g(0));
  for (std::size_t i = 0; i < k; ++i) out.record_step(h.p(i), h.alpha(i), h.phi(i), h.x(i + 1), h.g(i + 1));
  return out;
}

template <class T>
double rel_gap(const Vector<T>& a, const Vector<T>& b) {
  return to_double(norm2(sub(a, b))) / std::max(to_double(norm2(b)), 1e-300);
}

template <class T>
double rel_gap(const Matrix<T>& a, const Matrix<T>& b) {
  return to_double(frobenius_norm(sub(a, b))) / std::max(to_double(frobenius_norm(b)), 1e-300);
}

/// Independent Fletcher–Reeves PCG over a recorded gradient sequence, B0 = I:
/// p_0 = −g_0, p_k = −g_k + (‖g_k‖²/‖g_{k−1}‖²) p_{k−1}.
template <class T>
std::vector<Vector<T>> fr_directions(const std::vector<Vector<T>>& grads) {
  std::vector<Vector<T>> out;
  for (std::size_t k = 0; k < grads.size(); ++k) {
    Vector<T> p = negated(grads[k]);
    if (k > 0) {
      const T beta = dot(grads[k], grads[k]) / dot(grads[k - 1], grads[k - 1]);
      axpy(beta, out.back(), p);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace qnlab::testing
