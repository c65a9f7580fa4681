#include "doctest.h"
#include "qnlab/bench.hpp"
#include "qnlab/random.hpp"
#include "support.hpp"

using namespace qnlab;
using namespace qnlab::testing;

namespace {

template <class T>
void check_orthonormal(const SubspaceBasis<T>& b, double tol) {
  const std::size_t q = b.q();
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      const double v = to_double(dot(b.z()[i], b.z()[j]));
      CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) <= tol);
    }
  // S = Z R
  const Matrix<T> zr = matmul(b.z_matrix(), b.r());
  for (std::size_t j = 0; j < q; ++j) {
    CHECK(rel_gap(zr.column(j), b.s()[j]) <= tol);
  }
}

template <class T>
std::function<Vector<T>(const Vector<T>&)> as_apply(const SymmetricOperator<T>& op) {
  return [&op](const Vector<T>& v) { return op.apply(v); };
}

}  // namespace

TEST_CASE("minimal basis at k = 1 on the hand system") {
  const auto res = run_steps<double>(hand_problem(), method_pcg(), 1);
  const auto& h = res.history;
  const auto cols = basis_columns(h, BasisRule::minimal());
  REQUIRE(cols.size() == 2);
  CHECK(cols[0] == h.p(0));
  CHECK(cols[1] == h.g(1));
  const auto b = build_basis(h, BasisRule::minimal());
  CHECK(b.q() == 2);
  CHECK(b.dropped() == 0);
  check_orthonormal(b, 1e-12);
  // First column of Z is p0/‖p0‖ = (1, 2)/√5.
  CHECK(b.z()[0][0] == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(b.z()[0][1] == doctest::Approx(2.0 / std::sqrt(5.0)));
}

TEST_CASE("gradient span at k = n − 1 is the whole space") {
  const std::size_t n = 8;
  const auto res = run_steps<double>(random_problem(n, 10.0, 3), method_pcg(), n - 1);
  REQUIRE(res.history.current() == n - 1);
  const auto b = build_basis(res.history, BasisRule::gradient_span());
  CHECK(b.q() == n);
  check_orthonormal(b, 1e-12);
}

TEST_CASE("a duplicate column is dropped") {
  SubspaceBasis<double> b(4);
  CHECK(b.append({1.0, 0.0, 1.0, 0.0}));
  CHECK(b.append({0.0, 1.0, 0.0, 2.0}));
  CHECK_FALSE(b.append({2.0, 0.0, 2.0, 0.0}));
  CHECK_FALSE(b.append({1.0, 3.0, 1.0, 6.0}));
  CHECK_FALSE(b.append({0.0, 0.0, 0.0, 0.0}));
  CHECK(b.q() == 2);
  CHECK(b.dropped() == 3);
  CHECK(b.append({0.0, 0.0, 1.0, 0.0}));
  CHECK(b.q() == 3);
  check_orthonormal(b, 1e-14);
}

TEST_CASE("refactor reproduces the factorization") {
  SubspaceBasis<double> b(30);
  SeededRng rng(5);
  for (int j = 0; j < 20; ++j) {
    Vector<double> v(30);
    for (auto& x : v) x = rng.normal();
    b.append(v);
  }
  const auto z_before = b.z();
  b.refactor();
  CHECK(b.q() == 20);
  for (std::size_t j = 0; j < 20; ++j) CHECK(rel_gap(b.z()[j], z_before[j]) < 1e-12);
  check_orthonormal(b, 1e-12);
}

TEST_CASE("many appends stay orthonormal across the periodic refactor") {
  SubspaceBasis<double> b(120);
  SeededRng rng(9);
  for (int j = 0; j < 110; ++j) {
    Vector<double> v(120);
    for (auto& x : v) x = rng.normal();
    b.append(v);
  }
  CHECK(b.q() == 110);
  check_orthonormal(b, 1e-11);
}

TEST_CASE("empty bases are rejected") {
  SubspaceBasis<double> b(3);
  const SymmetricOperator<double> op(Preconditioner<double>(), 3);
  CHECK_THROWS_AS(reduced_direction<double>(b, as_apply(op), {1.0, 0.0, 0.0}), InvalidRule);
  IterHistory<double> h;
  h.start({0.0, 0.0}, {0.0, 0.0});
  CHECK_THROWS_AS(build_basis(h, BasisRule::minimal()), InvalidRule);
}

TEST_CASE("full-space basis reproduces the dense solve") {
  const std::size_t n = 10;
  const auto res = run_steps<double>(random_problem(n, 100.0, 4), method_pcg(), n - 1);
  const auto& h = res.history;
  const auto rho = rho_values(h, RhoSchedule::scaled_random(0.1, 10.0, 2));
  const auto op = mup_operator(h, rho, 0.2);
  const Vector<double> dense = dense_solve(op.dense(), negated(h.g(h.current())), false);
  const auto basis = build_basis(h, BasisRule::gradient_span());
  REQUIRE(basis.q() == n);
  CHECK(rel_gap(reduced_direction<double>(basis, as_apply(op), negated(h.g(h.current()))), dense) <= 1e-10);
}

TEST_CASE("minimal basis with symPCGs is parallel to PCG at 64 digits") {
  PrecisionScope scope(64);
  const QuadraticProblem qp = random_problem(20, 1e3, 6);
  StrategyConfig cfg = method_sympcgs(5, MemoryPolicy::standard);
  cfg.solve = SolveMode::reduced;
  cfg.basis = BasisRule::minimal();
  cfg.rho = RhoSchedule::scaled_random(0.1, 1e4, 3);
  RunOptions opts;
  // At 64 digits this problem reaches ‖g_n‖ ≈ 1e-32, not 1e-60.
  opts.tol = 1e-25;
  opts.record_oracle_angle = true;
  const auto res = run<BigFloat>(qp, cfg, Vector<double>(20, 0.0), opts);
  CHECK(res.trace.status == RunStatus::converged);
  CHECK(res.trace.iterations <= 20);
  CHECK(*res.trace.max_one_minus_cos <= 1e-10);
}

TEST_CASE("five-column window has q = 5 for k > 4") {
  const auto res = run_steps<double>(random_problem(30, 1e3, 7), method_pcg(), 12);
  for (std::size_t k = 0; k <= 12; ++k) {
    const auto hk = prefix(res.history, k);
    const auto b = build_basis(hk, BasisRule::five_column());
    CHECK(b.q() == std::min<std::size_t>(k + 1, 5));
    if (k > 4) {
      const auto cols = basis_columns(hk, BasisRule::five_column());
      CHECK(cols[0] == hk.p(0));
      CHECK(cols[1] == hk.p(1));
      CHECK(cols[2] == hk.p(k - 2));
      CHECK(cols[3] == hk.p(k - 1));
      CHECK(cols[4] == hk.binv_g(k));
    }
  }
}

TEST_CASE("basis growth bounds") {
  const auto res = run_steps<double>(random_problem(30, 1e3, 8), method_pcg(), 15);
  for (std::size_t k = 0; k <= 15; ++k) {
    const auto hk = prefix(res.history, k);
    CHECK(build_basis(hk, BasisRule::minimal()).q() <= 2);
    CHECK(build_basis(hk, BasisRule::gradient_span()).q() <= k + 1);
    for (std::size_t t : {0u, 3u, 7u}) {
      const std::size_t tt = std::min(t, k);
      CHECK(build_basis(hk, BasisRule::windowed(t)).q() <= k - tt + 2);
    }
    CHECK(build_basis(hk, BasisRule::anchored(1, 3)).q() <= 5);
  }
}

TEST_CASE("solve equivalence whenever the dense solution lies in the span") {
  const auto res = run_steps<double>(random_problem(25, 1e3, 9), method_pcg(), 15);
  for (std::size_t k = 1; k <= 15; ++k) {
    const auto hk = prefix(res.history, k);
    const auto rho = rho_values(hk, RhoSchedule::scaled_random(0.1, 1e3, k));
    const auto op = sympcgs_operator(hk, sympcgs_active_set(k, 5, MemoryPolicy::standard), rho, 0.0);
    const Vector<double> rhs = negated(hk.g(k));
    const Vector<double> dense = dense_solve(op.dense(), rhs, false);
    for (const auto& rule : {BasisRule::minimal(), BasisRule::five_column(), BasisRule::windowed(k / 2)}) {
      const auto basis = build_basis(hk, rule);
      const Vector<double> out_of_span = sub(dense, basis.expand(basis.project(dense)));
      if (norm2(out_of_span) <= 1e-10 * norm2(dense)) {
        CHECK(rel_gap(reduced_direction<double>(basis, as_apply(op), rhs), dense) <= 1e-9);
      }
    }
  }
}

TEST_CASE("basis rules parse and name") {
  CHECK(BasisRule::parse("five").name() == "five");
  CHECK(BasisRule::parse("window:4").t == 4);
  CHECK(BasisRule::parse("anchored:1:3").name() == "anchored:1:3");
  CHECK(BasisRule::parse("span").kind == BasisKind::gradient_span);
  CHECK(BasisRule::parse("minimal").kind == BasisKind::minimal);
  CHECK_THROWS_AS(BasisRule::parse("qr"), InvalidRule);
}

// Only symPCGs is checked at cond 1e3: in double, reduced LC breaks down and
// reduced MuP stalls there.
TEST_CASE("reduced strategies run end to end") {
  const QuadraticProblem qp = random_problem(40, 1e2, 2);
  for (auto cfg : {method_lc(5, MemoryPolicy::standard), method_sympcgs(5, MemoryPolicy::standard),
                   method_mup(RhoSchedule::secant())}) {
    cfg.solve = SolveMode::reduced;
    cfg.basis = BasisRule::five_column();
    const Trace t = run_trace(qp, cfg, Vector<double>(40, 0.0), RunOptions{});
    CAPTURE(cfg.name());
    CHECK(t.status == RunStatus::converged);
  }
  StrategyConfig span = method_mup(RhoSchedule::secant());
  span.solve = SolveMode::reduced;
  span.basis = BasisRule::gradient_span();
  CHECK(run_trace(qp, span, Vector<double>(40, 0.0), RunOptions{}).status == RunStatus::converged);

  StrategyConfig hard = method_sympcgs(5, MemoryPolicy::standard);
  hard.solve = SolveMode::reduced;
  hard.basis = BasisRule::five_column();
  CHECK(run_trace(random_problem(40, 1e3, 2), hard, Vector<double>(40, 0.0), RunOptions{}).status ==
        RunStatus::converged);
}
