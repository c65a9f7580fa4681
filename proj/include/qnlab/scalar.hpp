#pragma once

// Real-scalar arithmetic contract shared by every kernel in the library.
//
// Two scalar types implement the contract: native `double` and `BigFloat`, an
// MPFR-backed value whose precision comes from a thread-local setting managed
// by `PrecisionScope`. Generic code is written once against `T` and dispatched
// at runtime through `with_scalar(mode, f)`.

#include <mpfr.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "qnlab/errors.hpp"

namespace qnlab {

enum class ScalarKind { native_double, big_float };

struct ScalarMode {
  ScalarKind kind = ScalarKind::native_double;
  unsigned digits = 0;  // decimal digits; big_float only

  static constexpr unsigned kDefaultDigits = 512;
  static constexpr unsigned kMinDigits = 32;

  static ScalarMode native() { return {ScalarKind::native_double, 0}; }
  static ScalarMode big(unsigned digits = kDefaultDigits) { return {ScalarKind::big_float, digits}; }

  bool is_native() const { return kind == ScalarKind::native_double; }

  /// Throws InvalidSpec unless digits >= 32 for big_float.
  void validate() const;

  /// "double" or "bf<digits>".
  std::string name() const;

  /// Parses "double" or a decimal digit count.
  static ScalarMode parse(std::string_view text);

  friend bool operator==(const ScalarMode&, const ScalarMode&) = default;
};

/// Binary precision for a given number of decimal digits.
mpfr_prec_t digits_to_bits(unsigned digits);

/// Precision (in bits) used for newly created BigFloat values on this thread.
mpfr_prec_t current_precision_bits();

/// Sets the thread's BigFloat precision for its lifetime, restoring on exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t saved_;
};

class BigFloat {
 public:
  BigFloat();
  BigFloat(double v);  // NOLINT(google-explicit-constructor)
  BigFloat(int v);     // NOLINT(google-explicit-constructor)
  BigFloat(long v);    // NOLINT(google-explicit-constructor)
  BigFloat(unsigned long v);  // NOLINT(google-explicit-constructor)
  BigFloat(long long v);      // NOLINT(google-explicit-constructor)
  explicit BigFloat(std::string_view decimal);

  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  BigFloat& operator+=(const BigFloat& rhs);
  BigFloat& operator-=(const BigFloat& rhs);
  BigFloat& operator*=(const BigFloat& rhs);
  /// Throws ArithmeticError on division by exact zero.
  BigFloat& operator/=(const BigFloat& rhs);

  BigFloat operator-() const;

  friend BigFloat operator+(BigFloat lhs, const BigFloat& rhs) { return lhs += rhs; }
  friend BigFloat operator-(BigFloat lhs, const BigFloat& rhs) { return lhs -= rhs; }
  friend BigFloat operator*(BigFloat lhs, const BigFloat& rhs) { return lhs *= rhs; }
  friend BigFloat operator/(BigFloat lhs, const BigFloat& rhs) { return lhs /= rhs; }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b);

  /// Round-to-nearest conversion.
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  std::string to_string(int significant_digits = 20) const;
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  mpfr_prec_t precision_bits() const { return mpfr_get_prec(v_); }

  /// acc += a * b with a single rounding.
  friend void mul_add(BigFloat& acc, const BigFloat& a, const BigFloat& b);
  /// acc -= a * b with a single rounding.
  friend void mul_sub(BigFloat& acc, const BigFloat& a, const BigFloat& b);

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

 private:
  void init();
  mpfr_t v_;
};

BigFloat sqrt(const BigFloat& x);
BigFloat abs(const BigFloat& x);

inline void mul_add(double& acc, double a, double b) { acc += a * b; }
inline void mul_sub(double& acc, double a, double b) { acc -= a * b; }

/// The scalar operation set. Every function is deterministic for a fixed mode.
template <class T>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  using value_type = double;
  static double add(double a, double b) { return a + b; }
  static double sub(double a, double b) { return a - b; }
  static double mul(double a, double b) { return a * b; }
  static double div(double a, double b);
  static double sqrt(double a);
  static double neg(double a) { return -a; }
  static int compare(double a, double b) { return (a > b) - (a < b); }
  static double from_rational(long long num, long long den);
  static double from_double(double v) { return v; }
  static double to_double(double v) { return v; }
  static double abs(double v) { return std::fabs(v); }
  /// Unit roundoff.
  static double epsilon() { return 0x1p-53; }
};

template <>
struct ScalarOps<BigFloat> {
  using value_type = BigFloat;
  static BigFloat add(const BigFloat& a, const BigFloat& b) { return a + b; }
  static BigFloat sub(const BigFloat& a, const BigFloat& b) { return a - b; }
  static BigFloat mul(const BigFloat& a, const BigFloat& b) { return a * b; }
  static BigFloat div(const BigFloat& a, const BigFloat& b) { return a / b; }
  static BigFloat sqrt(const BigFloat& a) { return qnlab::sqrt(a); }
  static BigFloat neg(const BigFloat& a) { return -a; }
  static int compare(const BigFloat& a, const BigFloat& b);
  static BigFloat from_rational(long long num, long long den);
  static BigFloat from_double(double v) { return BigFloat(v); }
  static double to_double(const BigFloat& v) { return v.to_double(); }
  static BigFloat abs(const BigFloat& v) { return qnlab::abs(v); }
  /// Unit roundoff at the current thread precision.
  static double epsilon();
};

template <class T>
inline double to_double(const T& v) {
  return ScalarOps<T>::to_double(v);
}

template <class T>
inline T from_double(double v) {
  return ScalarOps<T>::from_double(v);
}

template <class T>
inline T abs_value(const T& v) {
  return ScalarOps<T>::abs(v);
}

template <class T>
inline T sqrt_checked(const T& v) {
  return ScalarOps<T>::sqrt(v);
}

template <class T>
inline constexpr bool is_big_float_v = std::is_same_v<T, BigFloat>;

/// Invokes `f(std::type_identity<T>{})` with T chosen by `mode`. For big-float
/// modes the call runs under a PrecisionScope of the requested digits.
template <class F>
decltype(auto) with_scalar(const ScalarMode& mode, F&& f) {
  mode.validate();
  if (mode.is_native()) {
    return std::forward<F>(f)(std::type_identity<double>{});
  }
  PrecisionScope scope(mode.digits);
  return std::forward<F>(f)(std::type_identity<BigFloat>{});
}

}  // namespace qnlab
