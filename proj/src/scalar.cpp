#include "qnlab/scalar.hpp"

#include <charconv>
#include <cmath>
#include <vector>

namespace qnlab {

static_assert(sizeof(long) == sizeof(long long), "long long values go through mpfr_set_si");

namespace {

thread_local mpfr_prec_t tls_precision = 0;

}  // namespace

mpfr_prec_t digits_to_bits(unsigned digits) {
  // log2(10) = 3.32192809488736...; round up and add guard bits.
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.321928094887362)) + 4;
}

mpfr_prec_t current_precision_bits() {
  if (tls_precision == 0) {
    tls_precision = digits_to_bits(ScalarMode::kDefaultDigits);
  }
  return tls_precision;
}

PrecisionScope::PrecisionScope(unsigned digits) : saved_(current_precision_bits()) {
  tls_precision = digits_to_bits(digits);
}

PrecisionScope::~PrecisionScope() { tls_precision = saved_; }

void ScalarMode::validate() const {
  if (kind == ScalarKind::big_float && digits < kMinDigits) {
    throw InvalidSpec("big-float precision must be at least 32 digits, got " + std::to_string(digits));
  }
}

std::string ScalarMode::name() const {
  return is_native() ? std::string("double") : "bf" + std::to_string(digits);
}

ScalarMode ScalarMode::parse(std::string_view text) {
  if (text == "double") return native();
  unsigned digits = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), digits);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidSpec("precision must be 'double' or a digit count: " + std::string(text));
  }
  ScalarMode mode = big(digits);
  mode.validate();
  return mode;
}

// ---------------------------------------------------------------------------

void BigFloat::init() { mpfr_init2(v_, current_precision_bits()); }

BigFloat::BigFloat() {
  init();
  mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(double v) {
  init();
  mpfr_set_d(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(int v) {
  init();
  mpfr_set_si(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(long v) {
  init();
  mpfr_set_si(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(unsigned long v) {
  init();
  mpfr_set_ui(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(long long v) {
  init();
  mpfr_set_si(v_, static_cast<long>(v), MPFR_RNDN);
}

BigFloat::BigFloat(std::string_view decimal) {
  init();
  std::string s(decimal);
  if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    mpfr_clear(v_);
    throw InvalidInput("not a decimal number: " + s);
  }
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  // Steal the limb storage; the moved-from object keeps a null limb pointer.
  v_[0] = other.v_[0];
  other.v_[0]._mpfr_d = nullptr;
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    if (v_[0]._mpfr_d == nullptr) {
      mpfr_init2(v_, mpfr_get_prec(other.v_));
    } else if (mpfr_get_prec(v_) != mpfr_get_prec(other.v_)) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    }
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  if (this != &other) {
    std::swap(v_[0], other.v_[0]);
  }
  return *this;
}

BigFloat::~BigFloat() {
  if (v_[0]._mpfr_d != nullptr) {
    mpfr_clear(v_);
  }
}

BigFloat& BigFloat::operator+=(const BigFloat& rhs) {
  mpfr_add(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator-=(const BigFloat& rhs) {
  mpfr_sub(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator*=(const BigFloat& rhs) {
  mpfr_mul(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator/=(const BigFloat& rhs) {
  if (mpfr_zero_p(rhs.v_)) {
    throw ArithmeticError("division by exact zero");
  }
  mpfr_div(v_, v_, rhs.v_, MPFR_RNDN);
  return *this;
}

BigFloat BigFloat::operator-() const {
  BigFloat out(*this);
  mpfr_neg(out.v_, out.v_, MPFR_RNDN);
  return out;
}

std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b) {
  if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.v_, b.v_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

std::string BigFloat::to_string(int significant_digits) const {
  std::vector<char> buf(static_cast<std::size_t>(significant_digits) + 32);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", significant_digits, v_);
  return std::string(buf.data());
}

void mul_add(BigFloat& acc, const BigFloat& a, const BigFloat& b) {
  mpfr_fma(acc.v_, a.v_, b.v_, acc.v_, MPFR_RNDN);
}

void mul_sub(BigFloat& acc, const BigFloat& a, const BigFloat& b) {
  // acc - a*b = -(a*b - acc)
  mpfr_fms(acc.v_, a.v_, b.v_, acc.v_, MPFR_RNDN);
  mpfr_neg(acc.v_, acc.v_, MPFR_RNDN);
}

BigFloat sqrt(const BigFloat& x) {
  if (mpfr_sgn(x.raw()) < 0) {
    throw ArithmeticError("square root of a negative number");
  }
  BigFloat out;
  mpfr_sqrt(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

BigFloat abs(const BigFloat& x) {
  BigFloat out(x);
  mpfr_abs(out.raw(), out.raw(), MPFR_RNDN);
  return out;
}

// ---------------------------------------------------------------------------

double ScalarOps<double>::div(double a, double b) {
  if (b == 0.0) {
    throw ArithmeticError("division by exact zero");
  }
  return a / b;
}

double ScalarOps<double>::sqrt(double a) {
  if (a < 0.0) {
    throw ArithmeticError("square root of a negative number");
  }
  return std::sqrt(a);
}

double ScalarOps<double>::from_rational(long long num, long long den) {
  if (den == 0) {
    throw ArithmeticError("division by exact zero");
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

int ScalarOps<BigFloat>::compare(const BigFloat& a, const BigFloat& b) {
  const int c = mpfr_cmp(a.raw(), b.raw());
  return (c > 0) - (c < 0);
}

BigFloat ScalarOps<BigFloat>::from_rational(long long num, long long den) {
  if (den == 0) {
    throw ArithmeticError("division by exact zero");
  }
  BigFloat out;
  mpfr_set_si(out.raw(), static_cast<long>(num), MPFR_RNDN);
  mpfr_div_si(out.raw(), out.raw(), static_cast<long>(den), MPFR_RNDN);
  return out;
}

double ScalarOps<BigFloat>::epsilon() {
  return std::ldexp(1.0, -static_cast<int>(current_precision_bits()));
}

}  // namespace qnlab
