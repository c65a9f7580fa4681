#pragma once

#include <memory>
#include <optional>

#include "qnlab/linalg.hpp"

namespace qnlab {

/// The initial Hessian approximation B0: identity or an explicit SPD matrix.
template <class T>
class Preconditioner {
 public:
  Preconditioner() = default;

  /// Throws NotSpd when b0 has no Cholesky factorization.
  explicit Preconditioner(const Matrix<double>& b0)
      : b0_(std::make_shared<Matrix<T>>(cast_matrix<T>(b0))),
        chol_(std::make_shared<Cholesky<T>>(*b0_)) {}

  static Preconditioner from(const std::optional<Matrix<double>>& b0) {
    return b0 ? Preconditioner(*b0) : Preconditioner();
  }

  bool is_identity() const { return b0_ == nullptr; }

  /// B0 v
  Vector<T> apply(const Vector<T>& v) const { return is_identity() ? v : matvec(*b0_, v); }

  /// B0⁻¹ v
  Vector<T> solve(const Vector<T>& v) const { return is_identity() ? v : chol_->solve(v); }

  Matrix<T> dense(std::size_t n) const {
    if (is_identity()) return Matrix<T>::identity(n);
    check_same_size(b0_->rows(), n, "Preconditioner::dense");
    return *b0_;
  }

 private:
  std::shared_ptr<const Matrix<T>> b0_;
  std::shared_ptr<const Cholesky<T>> chol_;
};

}  // namespace qnlab
