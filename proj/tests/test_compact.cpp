#include "doctest.h"
#include "eigen_oracle.hpp"
#include "qnlab/bench.hpp"
#include "qnlab/compact.hpp"
#include "qnlab/random.hpp"
#include "support.hpp"

using namespace qnlab;
using namespace qnlab::testing;

namespace {

const IterHistory<double>& hand_history() {
  static const auto res = run_steps<double>(hand_problem(), method_pcg(), 1);
  return res.history;
}

}  // namespace

TEST_CASE("T_1 on the hand system") {
  const auto& h = hand_history();
  CHECK(h.gp(0) == doctest::Approx(-5.0));
  CHECK(h.alpha(0) == doctest::Approx(5.0 / 9.0));
  CHECK(dot(h.y(0), h.p(0)) == doctest::Approx(5.0));

  const TkMatrix<double> t = build_tk(h, {0.0});
  REQUIRE(t.size() == 2);
  CHECK(t.diag(0) == doctest::Approx(4.0 / 25.0));
  CHECK(t.diag(1) == doctest::Approx(9.0 / 25.0));
  CHECK(t.off(0) == doctest::Approx(-9.0 / 25.0));
  const Matrix<double> d = t.dense();
  CHECK(d(0, 1) == d(1, 0));

  const TkMatrix<double> t1 = build_tk(h, {1.0});
  CHECK(t1.diag_phi[0] == doctest::Approx(0.0));
  CHECK(t1.diag_phi[1] == doctest::Approx(1.0 / 5.0));
  CHECK(std::abs(t1.off_phi[0]) < 1e-15);
  CHECK(t1.diag_c == t.diag_c);
}

TEST_CASE("build_tk input checks") {
  IterHistory<double> h;
  h.start({0.0}, {1.0});
  CHECK_THROWS_AS(build_tk(h), InvalidInput);
  h.record_step({0.0}, 1.0, 0.0, {0.0}, {1.0});
  CHECK_THROWS_AS(build_tk(h), DegenerateHistory);
}

TEST_CASE("compact representation equals the recursive Broyden matrix") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 4 + seed;
    const auto res = broyden_history(n, 100.0, seed, n);
    const auto& h = res.history;
    for (std::size_t k = 1; k <= h.steps(); ++k) {
      const auto hk = prefix(h, k);
      const Matrix<double> rec = broyden_matrix(hk, k);
      const auto rep = compact_broyden(hk);
      const Matrix<double> cmp = rep.dense();
      CHECK(rel_gap(cmp, rec) <= 1e-10);
      CHECK(rel_gap(cmp, transpose(cmp)) == 0.0);
      const Vector<double> v = initial_point(n, true, seed + k);
      CHECK(rel_gap(rep.apply(v), matvec(rec, v)) <= 1e-10);
    }
  }
}

TEST_CASE("diagonal BFGS form matches the tridiagonal T^C form") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto res = broyden_history(10, 100.0, seed, 9);
    const auto& h = res.history;
    const std::size_t k = h.steps();
    const auto diag = build_bfgs_diagonal(h);
    const auto tri = compact_broyden(h, std::vector<double>(k, 0.0));
    CHECK(rel_gap(diag.dense(), tri.dense()) <= 1e-10);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(diag.d[2 * i] < 0.0);
      CHECK(diag.d[2 * i + 1] > 0.0);
    }
    // BFGS matrix of a BFGS run.
    const auto bf = run_steps<double>(random_problem(10, 100.0, seed), method_bfgs(), 7);
    CHECK(rel_gap(build_bfgs_diagonal(bf.history).dense(), broyden_matrix(bf.history, bf.history.steps())) <=
          1e-10);
  }
}

TEST_CASE("D_1 and Υ_1 on the hand system") {
  const auto& h = hand_history();
  const auto rep = build_bfgs_diagonal(h);
  REQUIRE(rep.d.size() == 2);
  CHECK(rep.d[0] == doctest::Approx(-1.0 / 5.0));
  CHECK(rep.d[1] == doctest::Approx(1.0 / dot(h.y(0), h.s(0))));
  CHECK(rep.d[1] == doctest::Approx(9.0 / 25.0));
  CHECK(rep.upsilon[0] == h.g(0));
  CHECK(rel_gap(rep.upsilon[1], h.y(0)) == 0.0);
}

TEST_CASE("G_k E_k = Υ_k exactly") {
  const auto e2 = ek_transform(2);
  CHECK(e2 == std::vector<std::vector<int>>{{1, -1, 0, 0}, {0, 1, 1, -1}, {0, 0, 0, 1}});
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto e = ek_transform(k);
    REQUIRE(e.size() == k + 1);
    REQUIRE(e.front().size() == 2 * k);
  }

  const auto res = run_steps<double>(random_problem(8, 100.0, 2), method_bfgs(), 6);
  const auto& h = res.history;
  const std::size_t k = h.steps();
  const auto rep = build_bfgs_diagonal(h);
  const auto e = ek_transform(k);
  for (std::size_t c = 0; c < 2 * k; ++c) {
    Vector<double> col(8, 0.0);
    for (std::size_t j = 0; j <= k; ++j)
      if (e[j][c] != 0) axpy(static_cast<double>(e[j][c]), h.g(j), col);
    // g_{i+1} − g_i computed either way is the same floating-point operation.
    CHECK(col == rep.upsilon[c]);
  }
}

TEST_CASE("SMW inverse application") {
  SUBCASE("empty update returns B0⁻¹v") {
    DiagonalBfgsRep<double> rep;
    Matrix<double> b0 = Matrix<double>::identity(3);
    b0(1, 1) = 4.0;
    rep.b0 = Preconditioner<double>(b0);
    rep.n = 3;
    const Vector<double> v{1.0, 2.0, 3.0};
    CHECK(smw_inverse_apply(rep, v) == Vector<double>{1.0, 0.5, 3.0});
  }
  SUBCASE("residual of both representations on n = 10") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const auto res = broyden_history(10, 100.0, seed, 8, 0.0, 1.0);
      const auto& h = res.history;
      const Vector<double> v = initial_point(10, true, 100 + seed);
      const auto tri = compact_broyden(h);
      const Vector<double> y = smw_inverse_apply(tri, v);
      CHECK(norm2(sub(tri.apply(y), v)) <= 1e-10 * norm2(v));
      const auto diag = build_bfgs_diagonal(h);
      const Vector<double> z = smw_inverse_apply(diag, v);
      CHECK(norm2(sub(diag.apply(z), v)) <= 1e-10 * norm2(v));
    }
  }
  SUBCASE("capacitance entries on the hand system") {
    const auto& h = hand_history();
    const Matrix<double> m = smw_capacitance(build_bfgs_diagonal(h));
    // m_00 = g0ᵀg0 + g0ᵀp0 = 5 − 5, m_01 = g0ᵀy0 = −5, m_11 = y0ᵀy0 + y0ᵀs0 = 425/81 + 25/9.
    CHECK(std::abs(m(0, 0)) < 1e-14);
    CHECK(m(0, 1) == doctest::Approx(-5.0));
    CHECK(m(1, 0) == doctest::Approx(-5.0));
    CHECK(m(1, 1) == doctest::Approx(650.0 / 81.0));
  }
}

TEST_CASE("exact-linesearch collapse of T^φ") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto res = broyden_history(12, 100.0, seed, 10);
    const auto& h = res.history;
    const TkMatrix<double> t = build_tk(h);
    for (std::size_t i = 0; i < h.steps(); ++i) {
      const double scale = std::abs(h.phi(i) / h.gp(i)) + 1e-300;
      CHECK(std::abs(t.off_phi[i]) <= 1e-12 * std::max(1.0, scale));
      CHECK(t.diag_phi[i + 1] == doctest::Approx(-h.phi(i) / h.gp(i)).epsilon(1e-10));
    }
    // b_0 = 1/y_0ᵀp_0 + 1/g_0ᵀp_0 vanishes only up to rounding.
    CHECK(std::abs(t.diag_phi[0]) <= 1e-12 * std::max(1.0, std::abs(h.phi(0) / h.gp(0))));
  }
}

TEST_CASE("B_k differs from the one-step BFGS update by a rank-one g_k term") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto res = broyden_history(10, 100.0, seed, 8);
    const auto& h = res.history;
    for (std::size_t k = 1; k <= h.steps(); ++k) {
      Matrix<double> bfgs = broyden_matrix(h, k - 1);
      apply_broyden_update(bfgs, broyden_update_terms(h, k - 1, 0.0));
      const Matrix<double> bk = broyden_matrix(h, k);
      Matrix<double> expected = bfgs;
      add_sym_outer(expected, -h.phi(k - 1) / h.gp(k - 1), h.g(k));
      CHECK(frobenius_norm(sub(bk, expected)) <= 1e-10 * frobenius_norm(bk));
    }
  }
}

TEST_CASE("rank-one solve") {
  SUBCASE("A = I, b = x = e1, γ = 1") {
    const auto r = rank_one_solve<double>({1.0, 0.0}, {1.0, 0.0}, 1.0);
    CHECK(r.y == Vector<double>{0.5, 0.0});
    REQUIRE(r.scaling_residual.has_value());
    CHECK(*r.scaling_residual == 0.0);
  }
  SUBCASE("γ = 0 returns x") {
    const auto r = rank_one_solve<double>({3.0, -1.0}, {1.0, 2.0}, 0.0);
    CHECK(r.y == Vector<double>{3.0, -1.0});
  }
  SUBCASE("zero denominator") {
    CHECK_THROWS_AS(rank_one_solve<double>({1.0, 0.0}, {1.0, 0.0}, -1.0), Breakdown);
  }
  SUBCASE("solution, scaling and the PD boundary on random 6x6") {
    SeededRng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix<double> a(6, 6);
      for (auto& v : a.data()) v = rng.normal();
      a = matmul(transpose(a), a);
      for (std::size_t i = 0; i < 6; ++i) a(i, i) += 0.5;
      Vector<double> b(6);
      for (auto& v : b) v = rng.normal();
      const Vector<double> x = Cholesky<double>(a).solve(b);
      const double gamma = rng.normal();
      const auto r = rank_one_solve(x, b, gamma);
      Matrix<double> ag = a;
      add_sym_outer(ag, gamma, b);
      CHECK(norm2(sub(matvec(ag, r.y), b)) <= 1e-10 * norm2(b));
      CHECK(std::abs(*r.scaling_residual) <= 1e-10 * std::abs(1.0 / dot(b, x)));

      const double crit = -1.0 / dot(b, x);
      Matrix<double> above = a, below = a;
      add_sym_outer(above, crit + 1e-3 * std::abs(crit), b);
      add_sym_outer(below, crit - 1e-3 * std::abs(crit), b);
      CHECK(min_eigenvalue(above) > 0.0);
      CHECK(min_eigenvalue(below) < 0.0);
    }
  }
}

TEST_CASE("stabilized PD check") {
  const QuadraticProblem qp = random_problem(10, 100.0, 3);
  const auto res = run_steps<double>(qp, method_pcg(), 5);
  const auto& grads = res.history.gs();
  REQUIRE(grads.size() == 6);
  const Preconditioner<double> b0;

  SUBCASE("difference pattern with positive ρ is PD") {
    for (double r : {1e-3, 1.0, 1e3}) {
      const auto v = stabilized_pd_check(b0, grads, std::vector<double>(5, r), difference_pattern(5));
      CHECK(v.pd);
      CHECK(v.min_eigenvalue > 0.0);
      // Eigen oracle on the same matrix.
      Matrix<double> b = Matrix<double>::identity(10);
      for (std::size_t i = 0; i < 5; ++i) {
        add_sym_outer(b, -1.0 / dot(grads[i], grads[i]), grads[i]);
        add_sym_outer(b, r, sub(grads[i + 1], grads[i]));
      }
      CHECK(v.min_eigenvalue == doctest::Approx(min_eigenvalue(b)).epsilon(1e-8));
    }
  }
  SUBCASE("random full-row-rank Mcoef with zero row sums is PD") {
    SeededRng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix<double> m(5, 6);
      for (std::size_t i = 0; i < 5; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < 6; ++j) mean += (m(i, j) = rng.normal()) / 6.0;
        for (std::size_t j = 0; j < 6; ++j) m(i, j) -= mean;
        double s = 0.0;
        for (std::size_t j = 0; j < 6; ++j) s += m(i, j);
        m(i, 5) -= s;
      }
      std::vector<double> rho(5);
      for (auto& r : rho) r = std::exp(rng.normal());
      CHECK(stabilized_pd_check(b0, grads, rho, m).pd);
    }
  }
  SUBCASE("a negative ρ gives an indefinite matrix") {
    std::vector<Vector<double>> e;
    for (std::size_t i = 0; i <= 5; ++i) {
      Vector<double> v(10, 0.0);
      v[i] = 1.0;
      e.push_back(v);
    }
    std::vector<double> rho(5, 1.0);
    rho[0] = -10.0;
    const auto v = stabilized_pd_check(b0, e, rho, difference_pattern(5));
    CHECK_FALSE(v.pd);
    CHECK(v.min_eigenvalue < 0.0);
  }
  SUBCASE("precondition violations") {
    Matrix<double> dup = difference_pattern(5);
    for (std::size_t j = 0; j < 6; ++j) dup(1, j) = dup(0, j);
    CHECK_THROWS_AS(stabilized_pd_check(b0, grads, std::vector<double>(5, 1.0), dup), InvalidInput);
    Matrix<double> sums = difference_pattern(5);
    sums(2, 2) = 0.5;
    CHECK_THROWS_AS(stabilized_pd_check(b0, grads, std::vector<double>(5, 1.0), sums), InvalidInput);
    std::vector<Vector<double>> skew = grads;
    axpy(0.1, skew[0], skew[1]);
    CHECK_THROWS_AS(stabilized_pd_check(b0, skew, std::vector<double>(5, 1.0), difference_pattern(5)),
                    InvalidInput);
    CHECK_THROWS_AS(stabilized_pd_check(b0, grads, std::vector<double>(4, 1.0), difference_pattern(5)),
                    InvalidInput);
  }
}
