#include "qnlab/driver.hpp"

#include <algorithm>
#include <chrono>

#include "qnlab/random.hpp"

namespace qnlab {

void RunOptions::validate() const {
  if (tol && !(*tol > 0.0)) throw InvalidSpec("tol must be positive");
  mode.validate();
}

double RunOptions::threshold(double g0_norm) const {
  if (tol) return tol_relative ? *tol * std::max(1.0, g0_norm) : *tol;
  return mode.is_native() ? 1e-8 * std::max(1.0, g0_norm) : 1e-30;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iter:
      return "max_iter";
    case RunStatus::breakdown:
      return "breakdown";
  }
  return "?";
}

Vector<double> initial_point(std::size_t n, bool random, std::uint64_t seed) {
  Vector<double> x(n, 0.0);
  if (random) {
    SeededRng rng = keyed_rng(seed, 0x78302d72616e64ULL);
    for (auto& v : x) v = rng.normal();
  }
  return x;
}

template <class T>
RunResult<T> run(const QuadraticProblem& problem, const StrategyConfig& config, const Vector<double>& x0,
                 const RunOptions& opts) {
  using Clock = std::chrono::steady_clock;
  opts.validate();
  const std::size_t n = problem.n;
  check_same_size(x0.size(), n, "run x0");
  config.validate(n);

  const Matrix<T> H = problem.hessian<T>();
  const Vector<T> c = problem.linear<T>();
  std::optional<Vector<T>> xstar;
  if (opts.record_error) xstar = exact_solution(H, c);

  RunResult<T> out{Trace{}, IterHistory<T>(Preconditioner<T>::from(config.b0))};
  Trace& tr = out.trace;
  IterHistory<T>& hist = out.history;
  tr.method = config.name();
  tr.seed = problem.seed;

  Vector<T> x = cast_vector<T>(x0);
  Vector<T> g = gradient(H, c, x);
  hist.start(x, g);

  auto strategy = make_strategy<T>(config, n);
  std::optional<PcgRecurrence<T>> oracle;
  if (opts.record_oracle_angle) oracle.emplace();
  std::optional<T> worst_gap;

  tr.threshold = opts.threshold(to_double(norm2(g)));
  const std::size_t cap = opts.cap(n);

  for (std::size_t k = 0;; ++k) {
    const Vector<T>& gk = hist.g(k);
    const Vector<T>& xk = hist.x(k);
    TraceRow row;
    row.iter = k;
    row.grad_norm = to_double(norm2(gk));
    if (xstar) row.err_norm = to_double(norm2(sub(xk, *xstar)));
    if (opts.record_iterates) tr.iterates.push_back(cast_vector<double>(xk));

    if (row.grad_norm <= tr.threshold) {
      tr.status = RunStatus::converged;
      tr.rows.push_back(row);
      break;
    }
    if (k >= cap) {
      tr.status = RunStatus::max_iter;
      tr.rows.push_back(row);
      break;
    }

    const auto t0 = Clock::now();
    try {
      StepDirection<T> dir = strategy->next(hist);
      Vector<T>& p = dir.p;
      row.delta_k = to_double(-dot(gk, p) / hist.gbg(k));
      if (oracle) {
        const Vector<T>& ppcg = oracle->next(hist);
        row.cos_to_pcg = cosine(p, ppcg);
        T gap = one_minus_cosine(p, ppcg);
        if (!worst_gap || gap > *worst_gap) worst_gap = gap;
      }
      const T gp = dot(gk, p);
      if (!(gp < T(0))) throw Breakdown("direction is not a descent direction");
      const Vector<T> hp = matvec(H, p);
      const T curv = dot(p, hp);
      if (!(curv > T(0))) throw NotSpd("nonpositive curvature along p_k");
      T alpha = -gp / curv;
      Vector<T> x_next(xk);
      axpy(alpha, p, x_next);
      Vector<T> g_next(gk);
      axpy(alpha, hp, g_next);
      if (opts.record_timing) {
        row.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
      }
      tr.rows.push_back(row);
      hist.record_step(std::move(p), std::move(alpha), dir.phi, std::move(x_next), std::move(g_next));
      tr.iterations = k + 1;
    } catch (const Breakdown& e) {
      tr.status = RunStatus::breakdown;
      tr.reason = e.what();
    } catch (const NotSpd& e) {
      tr.status = RunStatus::breakdown;
      tr.reason = e.what();
    } catch (const ArithmeticError& e) {
      tr.status = RunStatus::breakdown;
      tr.reason = e.what();
    } catch (const DegenerateHistory& e) {
      tr.status = RunStatus::breakdown;
      tr.reason = e.what();
    }
    if (tr.status == RunStatus::breakdown) {
      tr.breakdown_iter = k;
      tr.rows.push_back(row);
      break;
    }
  }
  if (worst_gap) tr.max_one_minus_cos = to_double(*worst_gap);
  return out;
}

Trace run_trace(const QuadraticProblem& problem, const StrategyConfig& config, const Vector<double>& x0,
                const RunOptions& opts) {
  return with_scalar(opts.mode, [&](auto tag) {
    using T = typename decltype(tag)::type;
    return run<T>(problem, config, x0, opts).trace;
  });
}

template RunResult<double> run<double>(const QuadraticProblem&, const StrategyConfig&, const Vector<double>&,
                                       const RunOptions&);
template RunResult<BigFloat> run<BigFloat>(const QuadraticProblem&, const StrategyConfig&, const Vector<double>&,
                                           const RunOptions&);

}  // namespace qnlab
