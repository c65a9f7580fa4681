#pragma once

// Dense vector/matrix kernels written once against the scalar contract.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qnlab/errors.hpp"
#include "qnlab/scalar.hpp"

namespace qnlab {

template <class T>
using Vector = std::vector<T>;

/// Row-major dense matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  T* row(std::size_t i) { return data_.data() + i * cols_; }
  const T* row(std::size_t i) const { return data_.data() + i * cols_; }

  Vector<T> column(std::size_t j) const {
    Vector<T> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  void set_column(std::size_t j, const Vector<T>& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

template <class T>
T dot(const Vector<T>& a, const Vector<T>& b) {
  check_same_size(a.size(), b.size(), "dot");
  T acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) mul_add(acc, a[i], b[i]);
  return acc;
}

template <class T>
T norm2(const Vector<T>& a) {
  return sqrt_checked(dot(a, a));
}

/// y += a * x
template <class T>
void axpy(const T& a, const Vector<T>& x, Vector<T>& y) {
  check_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) mul_add(y[i], a, x[i]);
}

template <class T>
Vector<T> scaled(const T& a, const Vector<T>& x) {
  Vector<T> out(x);
  for (auto& v : out) v *= a;
  return out;
}

template <class T>
Vector<T> add(const Vector<T>& a, const Vector<T>& b) {
  check_same_size(a.size(), b.size(), "add");
  Vector<T> out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

template <class T>
Vector<T> sub(const Vector<T>& a, const Vector<T>& b) {
  check_same_size(a.size(), b.size(), "sub");
  Vector<T> out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

template <class T>
Vector<T> negated(const Vector<T>& a) {
  Vector<T> out(a);
  for (auto& v : out) v = -v;
  return out;
}

template <class T>
Vector<T> matvec(const Matrix<T>& m, const Vector<T>& x) {
  check_same_size(m.cols(), x.size(), "matvec");
  Vector<T> out(m.rows(), T(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const T* r = m.row(i);
    T acc(0);
    for (std::size_t j = 0; j < m.cols(); ++j) mul_add(acc, r[j], x[j]);
    out[i] = std::move(acc);
  }
  return out;
}

/// mᵀ x
template <class T>
Vector<T> matvec_transposed(const Matrix<T>& m, const Vector<T>& x) {
  check_same_size(m.rows(), x.size(), "matvec_transposed");
  Vector<T> out(m.cols(), T(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const T* r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) mul_add(out[j], r[j], x[i]);
  }
  return out;
}

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  check_same_size(a.cols(), b.rows(), "matmul");
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      if (aik == T(0)) continue;
      const T* br = b.row(k);
      T* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) mul_add(orow[j], aik, br[j]);
    }
  }
  return out;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <class T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  check_same_size(a.rows(), b.rows(), "add rows");
  check_same_size(a.cols(), b.cols(), "add cols");
  Matrix<T> out(a);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

template <class T>
Matrix<T> sub(const Matrix<T>& a, const Matrix<T>& b) {
  check_same_size(a.rows(), b.rows(), "sub rows");
  check_same_size(a.cols(), b.cols(), "sub cols");
  Matrix<T> out(a);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

/// m += coef * u vᵀ
template <class T>
void add_outer(Matrix<T>& m, const T& coef, const Vector<T>& u, const Vector<T>& v) {
  check_same_size(m.rows(), u.size(), "add_outer rows");
  check_same_size(m.cols(), v.size(), "add_outer cols");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const T cu = coef * u[i];
    T* r = m.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) mul_add(r[j], cu, v[j]);
  }
}

/// m += coef * u uᵀ, keeping m exactly symmetric.
template <class T>
void add_sym_outer(Matrix<T>& m, const T& coef, const Vector<T>& u) {
  check_same_size(m.rows(), u.size(), "add_sym_outer");
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const T cu = coef * u[i];
    for (std::size_t j = i; j < n; ++j) {
      mul_add(m(i, j), cu, u[j]);
      if (j != i) m(j, i) = m(i, j);
    }
  }
}

template <class T>
T frobenius_norm(const Matrix<T>& m) {
  T acc(0);
  for (const auto& v : m.data()) mul_add(acc, v, v);
  return sqrt_checked(acc);
}

template <class T>
T max_abs(const Matrix<T>& m) {
  T best(0);
  for (const auto& v : m.data()) {
    T a = abs_value(v);
    if (a > best) best = a;
  }
  return best;
}

template <class T>
T max_abs(const Vector<T>& v) {
  T best(0);
  for (const auto& x : v) {
    T a = abs_value(x);
    if (a > best) best = a;
  }
  return best;
}

template <class U, class T>
Vector<U> cast_vector(const Vector<T>& v) {
  Vector<U> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if constexpr (std::is_same_v<U, double>) {
      out.push_back(to_double(x));
    } else {
      out.push_back(U(x));
    }
  }
  return out;
}

template <class U, class T>
Matrix<U> cast_matrix(const Matrix<T>& m) {
  Matrix<U> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    if constexpr (std::is_same_v<U, double>) {
      out.data()[i] = to_double(m.data()[i]);
    } else {
      out.data()[i] = U(m.data()[i]);
    }
  }
  return out;
}

/// Cosine of the angle between two vectors, in double.
template <class T>
double cosine(const Vector<T>& a, const Vector<T>& b) {
  const T na = norm2(a);
  const T nb = norm2(b);
  if (na == T(0) || nb == T(0)) return 0.0;
  return to_double(dot(a, b) / (na * nb));
}

/// 1 - cos(a, b) evaluated in T so that values far below double epsilon survive.
template <class T>
T one_minus_cosine(const Vector<T>& a, const Vector<T>& b) {
  const T na = norm2(a);
  const T nb = norm2(b);
  if (na == T(0) || nb == T(0)) return T(1);
  // 1 - cos = ‖a/|a| - b/|b|‖² / 2, which avoids cancellation.
  T acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    T d = a[i] / na - b[i] / nb;
    mul_add(acc, d, d);
  }
  return acc / T(2);
}

/// ‖a - b‖ / ‖b‖ (or ‖a - b‖ when b = 0).
template <class T>
T relative_difference(const Vector<T>& a, const Vector<T>& b) {
  const T nb = norm2(b);
  const T d = norm2(sub(a, b));
  return nb == T(0) ? d : d / nb;
}

// ---------------------------------------------------------------------------

/// Dense Cholesky A = L Lᵀ. Throws NotSpd when a pivot is not strictly positive.
template <class T>
class Cholesky {
 public:
  explicit Cholesky(const Matrix<T>& a) : l_(a.rows(), a.cols()) {
    check_same_size(a.rows(), a.cols(), "Cholesky");
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
      T d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) mul_sub(d, l_(j, k), l_(j, k));
      if (!(d > T(0))) {
        throw NotSpd("Cholesky pivot " + std::to_string(j) + " is not positive");
      }
      const T ljj = sqrt_checked(d);
      l_(j, j) = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        T s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) mul_sub(s, l_(i, k), l_(j, k));
        l_(i, j) = s / ljj;
      }
    }
  }

  std::size_t size() const { return l_.rows(); }
  const Matrix<T>& factor() const { return l_; }

  Vector<T> solve(const Vector<T>& b) const {
    check_same_size(size(), b.size(), "Cholesky::solve");
    const std::size_t n = size();
    Vector<T> z(b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) mul_sub(z[i], l_(i, k), z[k]);
      z[i] /= l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) mul_sub(z[ii], l_(k, ii), z[k]);
      z[ii] /= l_(ii, ii);
    }
    return z;
  }

 private:
  Matrix<T> l_;
};

/// Symmetric indefinite factorization P A Pᵀ = L D Lᵀ with Bunch–Kaufman
/// pivoting. D is block diagonal with 1×1 and 2×2 blocks.
///
/// A pivot whose magnitude (for 2×2 blocks, the smaller eigenvalue magnitude)
/// falls below `pivot_tol * max|A|` raises SingularSystem.
template <class T>
class SymmetricIndefiniteFactor {
 public:
  static constexpr double kDefaultPivotTol = 1e-14;

  explicit SymmetricIndefiniteFactor(const Matrix<T>& a, double pivot_tol = kDefaultPivotTol);

  std::size_t size() const { return n_; }
  Vector<T> solve(const Vector<T>& b) const;

  /// Numbers of positive and negative eigenvalues (Sylvester's law on D).
  std::pair<std::size_t, std::size_t> inertia() const;

  /// Smallest pivot magnitude relative to max|A| that was accepted.
  double min_relative_pivot() const { return min_rel_pivot_; }

 private:
  std::size_t n_ = 0;
  Matrix<T> l_;
  // d_diag_[k] / d_off_[k] hold the block-diagonal D; block_[k] is 1 or 2 at
  // the first index of a block and 0 at the second index of a 2×2 block.
  Vector<T> d_diag_;
  Vector<T> d_off_;
  std::vector<int> block_;
  std::vector<std::size_t> perm_;
  double min_rel_pivot_ = 1.0;
};

template <class T>
SymmetricIndefiniteFactor<T>::SymmetricIndefiniteFactor(const Matrix<T>& a_in, double pivot_tol)
    : n_(a_in.rows()),
      l_(Matrix<T>::identity(a_in.rows())),
      d_diag_(a_in.rows(), T(0)),
      d_off_(a_in.rows(), T(0)),
      block_(a_in.rows(), 0),
      perm_(a_in.rows()) {
  check_same_size(a_in.rows(), a_in.cols(), "SymmetricIndefiniteFactor");
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  if (n == 0) return;

  Matrix<T> a(a_in);
  const T amax = max_abs(a);
  if (amax == T(0)) {
    throw SingularSystem("zero matrix", 0.0, 0);
  }
  const T tol = amax * T(pivot_tol);
  const T alpha = (T(1) + sqrt_checked(T(17))) / T(8);

  auto swap_sym = [&](std::size_t k, std::size_t i, std::size_t j) {
    if (i == j) return;
    // Rows/columns at or beyond k hold the active submatrix; swap entire rows
    // and columns (columns < k are dead and harmless to permute).
    for (std::size_t c = 0; c < n; ++c) std::swap(a(i, c), a(j, c));
    for (std::size_t r = 0; r < n; ++r) std::swap(a(r, i), a(r, j));
    for (std::size_t c = 0; c < k; ++c) std::swap(l_(i, c), l_(j, c));
    std::swap(perm_[i], perm_[j]);
  };

  std::size_t k = 0;
  while (k < n) {
    T lambda(0);
    std::size_t r = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      T v = abs_value(a(i, k));
      if (v > lambda) {
        lambda = v;
        r = i;
      }
    }
    const T akk = abs_value(a(k, k));
    bool two_by_two = false;
    if (akk >= alpha * lambda) {
      // 1×1 at k
    } else {
      T sigma(0);
      for (std::size_t j = k; j < n; ++j) {
        if (j == r) continue;
        T v = abs_value(a(r, j));
        if (v > sigma) sigma = v;
      }
      if (akk * sigma >= alpha * lambda * lambda) {
        // 1×1 at k
      } else if (abs_value(a(r, r)) >= alpha * sigma) {
        swap_sym(k, k, r);
      } else {
        swap_sym(k, k + 1, r);
        two_by_two = true;
      }
    }

    if (!two_by_two) {
      const T d = a(k, k);
      const T rel = abs_value(d) / amax;
      if (abs_value(d) <= tol) {
        throw SingularSystem("relative pivot below threshold", to_double(rel), k);
      }
      min_rel_pivot_ = std::min(min_rel_pivot_, to_double(rel));
      d_diag_[k] = d;
      block_[k] = 1;
      for (std::size_t i = k + 1; i < n; ++i) l_(i, k) = a(i, k) / d;
      for (std::size_t i = k + 1; i < n; ++i) {
        const T li = l_(i, k);
        for (std::size_t j = k + 1; j <= i; ++j) {
          mul_sub(a(i, j), li, a(j, k));
          a(j, i) = a(i, j);
        }
      }
      k += 1;
    } else {
      const T p = a(k, k);
      const T q = a(k + 1, k);
      const T s = a(k + 1, k + 1);
      const T det = p * s - q * q;
      T bound = (abs_value(p) > abs_value(s) ? abs_value(p) : abs_value(s)) + abs_value(q);
      const T min_eig = abs_value(det) / bound;
      if (min_eig <= tol) {
        throw SingularSystem("relative 2x2 pivot below threshold", to_double(min_eig / amax), k);
      }
      min_rel_pivot_ = std::min(min_rel_pivot_, to_double(min_eig / amax));
      d_diag_[k] = p;
      d_diag_[k + 1] = s;
      d_off_[k] = q;
      block_[k] = 2;
      block_[k + 1] = 0;
      for (std::size_t i = k + 2; i < n; ++i) {
        const T c1 = a(i, k);
        const T c2 = a(i, k + 1);
        l_(i, k) = (c1 * s - c2 * q) / det;
        l_(i, k + 1) = (c2 * p - c1 * q) / det;
      }
      for (std::size_t i = k + 2; i < n; ++i) {
        const T l1 = l_(i, k);
        const T l2 = l_(i, k + 1);
        for (std::size_t j = k + 2; j <= i; ++j) {
          mul_sub(a(i, j), l1, a(j, k));
          mul_sub(a(i, j), l2, a(j, k + 1));
          a(j, i) = a(i, j);
        }
      }
      k += 2;
    }
  }
}

template <class T>
Vector<T> SymmetricIndefiniteFactor<T>::solve(const Vector<T>& b) const {
  check_same_size(n_, b.size(), "SymmetricIndefiniteFactor::solve");
  const std::size_t n = n_;
  Vector<T> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) mul_sub(z[i], l_(i, k), z[k]);
  for (std::size_t k = 0; k < n;) {
    if (block_[k] == 1) {
      z[k] /= d_diag_[k];
      k += 1;
    } else {
      const T& p = d_diag_[k];
      const T& s = d_diag_[k + 1];
      const T& q = d_off_[k];
      const T det = p * s - q * q;
      const T z0 = z[k];
      const T z1 = z[k + 1];
      z[k] = (s * z0 - q * z1) / det;
      z[k + 1] = (p * z1 - q * z0) / det;
      k += 2;
    }
  }
  for (std::size_t ii = n; ii-- > 0;)
    for (std::size_t k = ii + 1; k < n; ++k) mul_sub(z[ii], l_(k, ii), z[k]);
  Vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = z[i];
  return x;
}

template <class T>
std::pair<std::size_t, std::size_t> SymmetricIndefiniteFactor<T>::inertia() const {
  std::size_t pos = 0, neg = 0;
  for (std::size_t k = 0; k < n_;) {
    if (block_[k] == 1) {
      (d_diag_[k] > T(0) ? pos : neg) += 1;
      k += 1;
    } else {
      // det < 0 gives one eigenvalue of each sign.
      const T det = d_diag_[k] * d_diag_[k + 1] - d_off_[k] * d_off_[k];
      if (det < T(0)) {
        pos += 1;
        neg += 1;
      } else if (d_diag_[k] > T(0)) {
        pos += 2;
      } else {
        neg += 2;
      }
      k += 2;
    }
  }
  return {pos, neg};
}

/// Solves A x = b for symmetric A by the indefinite factorization.
template <class T>
Vector<T> solve_symmetric(const Matrix<T>& a, const Vector<T>& b,
                          double pivot_tol = SymmetricIndefiniteFactor<T>::kDefaultPivotTol) {
  return SymmetricIndefiniteFactor<T>(a, pivot_tol).solve(b);
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
template <class T>
Vector<T> symmetric_eigenvalues(Matrix<T> a, int max_sweeps = 100) {
  check_same_size(a.rows(), a.cols(), "symmetric_eigenvalues");
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    T off(0);
    T total(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        mul_add(total, a(i, j), a(i, j));
        if (i != j) mul_add(off, a(i, j), a(i, j));
      }
    if (off == T(0) || off <= total * T(ScalarOps<T>::epsilon()) * T(ScalarOps<T>::epsilon())) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == T(0)) continue;
        const T theta = (a(q, q) - a(p, p)) / (T(2) * a(p, q));
        const T sgn = theta < T(0) ? T(-1) : T(1);
        const T t = sgn / (abs_value(theta) + sqrt_checked(theta * theta + T(1)));
        const T c = T(1) / sqrt_checked(t * t + T(1));
        const T s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const T akp = a(k, p);
          const T akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const T apk = a(p, k);
          const T aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector<T> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), [](const T& x, const T& y) { return x < y; });
  return eig;
}

/// Householder QR of a square or tall matrix. Returns (Q, R) with Q having
/// orthonormal columns (thin form) and diag(R) ≥ 0.
template <class T>
std::pair<Matrix<T>, Matrix<T>> householder_qr(const Matrix<T>& a_in) {
  const std::size_t m = a_in.rows();
  const std::size_t n = a_in.cols();
  if (m < n) throw DimensionMismatch("householder_qr needs rows >= cols");
  Matrix<T> a(a_in);
  std::vector<Vector<T>> vs;
  vs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector<T> v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = a(i, k);
    const T nx = norm2(v);
    if (nx == T(0)) {
      vs.emplace_back(m - k, T(0));
      continue;
    }
    const T alpha = v[0] < T(0) ? nx : -nx;
    v[0] -= alpha;
    const T nv = norm2(v);
    for (auto& e : v) e /= nv;
    for (std::size_t j = k; j < n; ++j) {
      T s(0);
      for (std::size_t i = k; i < m; ++i) mul_add(s, v[i - k], a(i, j));
      s *= T(2);
      for (std::size_t i = k; i < m; ++i) mul_sub(a(i, j), s, v[i - k]);
    }
    vs.push_back(std::move(v));
  }
  Matrix<T> r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = a(i, j);
  Matrix<T> q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = T(1);
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector<T>& v = vs[kk];
    for (std::size_t j = 0; j < n; ++j) {
      T s(0);
      for (std::size_t i = kk; i < m; ++i) mul_add(s, v[i - kk], q(i, j));
      s *= T(2);
      for (std::size_t i = kk; i < m; ++i) mul_sub(q(i, j), s, v[i - kk]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) < T(0)) {
      for (std::size_t j = i; j < n; ++j) r(i, j) = -r(i, j);
      for (std::size_t row = 0; row < m; ++row) q(row, i) = -q(row, i);
    }
  }
  return {std::move(q), std::move(r)};
}

}  // namespace qnlab
