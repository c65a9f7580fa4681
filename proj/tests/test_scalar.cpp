#include <cstring>

#include "doctest.h"
#include "qnlab/scalar.hpp"

using namespace qnlab;

TEST_CASE("native double: 1 + 2 is exactly 3") {
  CHECK(ScalarOps<double>::add(1.0, 2.0) == 3.0);
  CHECK(ScalarOps<double>::from_rational(6, 2) == 3.0);
}

TEST_CASE("big float at 64 digits: (1/3)*3 is 1 within 1e-60") {
  PrecisionScope scope(64);
  const BigFloat third = BigFloat(1) / BigFloat(3);
  const BigFloat one = third * BigFloat(3);
  const BigFloat err = abs(one - BigFloat(1));
  CHECK(err < BigFloat("1e-60"));
  CHECK(ScalarOps<BigFloat>::epsilon() < 1e-63);
}

TEST_CASE("absorption: 1 + 1e4 * 1e-16 stays 1 in double but not at 512 digits") {
  double d = 1.0;
  for (int i = 0; i < 10000; ++i) d += 1e-16;
  CHECK(d == 1.0);

  PrecisionScope scope(512);
  BigFloat b(1);
  const BigFloat tiny(1e-16);
  for (int i = 0; i < 10000; ++i) b += tiny;
  CHECK(b > BigFloat(1));
  // The exact sum of the double nearest 1e-16 taken 1e4 times.
  CHECK(abs(b - BigFloat(1) - BigFloat(1e-16) * BigFloat(10000)) < BigFloat("1e-500"));
}

TEST_CASE("division by zero and negative square roots raise ArithmeticError") {
  CHECK_THROWS_AS(ScalarOps<double>::div(1.0, 0.0), ArithmeticError);
  CHECK_THROWS_AS(ScalarOps<double>::sqrt(-1.0), ArithmeticError);
  CHECK_THROWS_AS(ScalarOps<double>::from_rational(1, 0), ArithmeticError);
  PrecisionScope scope(40);
  CHECK_THROWS_AS(BigFloat(1) / BigFloat(0), ArithmeticError);
  CHECK_THROWS_AS(sqrt(BigFloat(-2)), ArithmeticError);
  CHECK(ScalarOps<double>::sqrt(0.0) == 0.0);
}

TEST_CASE("scalar modes validate, parse and name") {
  CHECK(ScalarMode::parse("double") == ScalarMode::native());
  CHECK(ScalarMode::parse("128") == ScalarMode::big(128));
  CHECK(ScalarMode::big(128).name() == "bf128");
  CHECK(ScalarMode::native().name() == "double");
  CHECK_THROWS_AS(ScalarMode::big(31).validate(), InvalidSpec);
  CHECK_NOTHROW(ScalarMode::big(32).validate());
  CHECK_THROWS_AS(ScalarMode::parse("fast"), InvalidSpec);
  CHECK_THROWS_AS(ScalarMode::parse("8"), InvalidSpec);
}

TEST_CASE("precision scopes nest and restore") {
  const mpfr_prec_t outer = current_precision_bits();
  {
    PrecisionScope a(100);
    CHECK(current_precision_bits() == digits_to_bits(100));
    {
      PrecisionScope b(300);
      CHECK(BigFloat(1).precision_bits() == digits_to_bits(300));
    }
    CHECK(current_precision_bits() == digits_to_bits(100));
  }
  CHECK(current_precision_bits() == outer);
  CHECK(digits_to_bits(512) >= 1700);
}

TEST_CASE("with_scalar dispatches on the mode") {
  const bool native = with_scalar(ScalarMode::native(), [](auto tag) {
    using T = typename decltype(tag)::type;
    return std::is_same_v<T, double>;
  });
  CHECK(native);
  const mpfr_prec_t bits = with_scalar(ScalarMode::big(77), [](auto tag) {
    using T = typename decltype(tag)::type;
    if constexpr (std::is_same_v<T, double>) {
      return mpfr_prec_t(53);
    } else {
      return T(1).precision_bits();
    }
  });
  CHECK(bits == digits_to_bits(77));
}

TEST_CASE("big float operations are deterministic bit for bit") {
  PrecisionScope scope(128);
  auto compute = [] {
    BigFloat acc(0);
    for (int i = 1; i <= 200; ++i) {
      mul_add(acc, sqrt(BigFloat(i)), BigFloat(1) / BigFloat(i + 1));
    }
    return acc;
  };
  const BigFloat a = compute();
  const BigFloat b = compute();
  CHECK(a == b);
  CHECK(a.to_string(120) == b.to_string(120));
}

TEST_CASE("monotone refinement: more digits never moves further from a 2x reference") {
  auto harmonic = [] {
    BigFloat s(0);
    for (int i = 1; i <= 500; ++i) s += BigFloat(1) / BigFloat(i);
    return s;
  };
  for (unsigned d : {32u, 48u, 64u, 96u}) {
    BigFloat low, high, ref;
    {
      PrecisionScope s(d);
      low = harmonic();
    }
    {
      PrecisionScope s(d + 16);
      high = harmonic();
    }
    {
      PrecisionScope s(2 * (d + 16));
      ref = harmonic();
      const BigFloat ref_bound = abs(ref) * BigFloat(ScalarOps<BigFloat>::epsilon()) * BigFloat(1000);
      CHECK(abs(high - ref) <= abs(low - ref) + ref_bound);
    }
  }
}

TEST_CASE("comparison and conversions") {
  PrecisionScope scope(50);
  CHECK(ScalarOps<BigFloat>::compare(BigFloat(2), BigFloat(3)) == -1);
  CHECK(ScalarOps<BigFloat>::compare(BigFloat(3), BigFloat(3)) == 0);
  CHECK(ScalarOps<double>::compare(3.0, 2.0) == 1);
  CHECK(BigFloat(0.1).to_double() == 0.1);
  CHECK(ScalarOps<BigFloat>::from_rational(1, 4).to_double() == 0.25);
  CHECK(BigFloat("0.5").to_double() == 0.5);
  CHECK((-BigFloat(2)).to_double() == -2.0);
  CHECK(BigFloat(7LL).to_double() == 7.0);
}
