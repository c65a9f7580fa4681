#pragma once

#include <optional>
#include <vector>

#include "qnlab/preconditioner.hpp"

namespace qnlab {

/// A symmetric matrix given as
///   CᵀB0C + Σ_j coef_j v_j v_jᵀ,   C = I − (1/gp) p gᵀ (C = I when absent),
/// applied without densifying.
template <class T>
class SymmetricOperator {
 public:
  explicit SymmetricOperator(Preconditioner<T> b0, std::size_t n) : b0_(std::move(b0)), n_(n) {}

  /// Installs C = I − (1/gp) p gᵀ.
  void set_c_correction(Vector<T> p, Vector<T> g, T gp) {
    check_same_size(p.size(), n_, "set_c_correction p");
    check_same_size(g.size(), n_, "set_c_correction g");
    c_ = CTerm{std::move(p), std::move(g), std::move(gp)};
  }

  void add_term(T coef, Vector<T> v) {
    check_same_size(v.size(), n_, "add_term");
    terms_.push_back({std::move(coef), std::move(v)});
  }

  std::size_t size() const { return n_; }

  Vector<T> apply(const Vector<T>& v) const {
    check_same_size(v.size(), n_, "SymmetricOperator::apply");
    Vector<T> out;
    if (c_) {
      // w = C v; u = B0 w; out = Cᵀ u
      Vector<T> w(v);
      axpy(T(-1) * dot(c_->g, v) / c_->gp, c_->p, w);
      out = b0_.apply(w);
      const T pu = dot(c_->p, out) / c_->gp;
      axpy(T(-1) * pu, c_->g, out);
    } else {
      out = b0_.apply(v);
    }
    for (const auto& t : terms_) axpy(t.coef * dot(t.v, v), t.v, out);
    return out;
  }

  Matrix<T> dense() const {
    Matrix<T> m = b0_.dense(n_);
    if (c_) {
      // CᵀB0C = B0 − (1/gp)(B0p gᵀ + g pᵀB0) + (pᵀB0p / gp²) g gᵀ
      const Vector<T> bp = b0_.apply(c_->p);
      const T inv = T(1) / c_->gp;
      add_outer(m, -inv, bp, c_->g);
      add_outer(m, -inv, c_->g, bp);
      add_sym_outer(m, dot(c_->p, bp) * inv * inv, c_->g);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
          const T avg = (m(i, j) + m(j, i)) / T(2);
          m(i, j) = avg;
          m(j, i) = avg;
        }
    }
    for (const auto& t : terms_) add_sym_outer(m, t.coef, t.v);
    return m;
  }

 private:
  struct CTerm {
    Vector<T> p, g;
    T gp;
  };
  struct LowRank {
    T coef;
    Vector<T> v;
  };

  Preconditioner<T> b0_;
  std::size_t n_;
  std::optional<CTerm> c_;
  std::vector<LowRank> terms_;
};

}  // namespace qnlab
