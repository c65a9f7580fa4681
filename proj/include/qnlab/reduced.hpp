#pragma once

// Subspace (reduced-Hessian) solves: Z_kᵀB_kZ_k u = Z_kᵀ rhs, p = Z_k u, where
// S_k = Z_kR_k is a thin QR of the spanning columns.

#include <functional>
#include <string>
#include <vector>

#include "qnlab/history.hpp"

namespace qnlab {

enum class BasisKind { minimal, gradient_span, windowed, anchored };

/// Column rules:
///   minimal        {p_{k−1}, B0⁻¹g_k}
///   gradient_span  {B0⁻¹g_0, …, B0⁻¹g_k}
///   windowed(t)    {p_{t−1}, B0⁻¹g_t, …, B0⁻¹g_k}
///   anchored(a, b) {p_0..p_{a−1}, p_{k−b}..p_{k−1}, B0⁻¹g_k}; with a = b = 2
///                  this is the five-column window [p0, p1, p_{k−2}, p_{k−1}, B0⁻¹g_k].
struct BasisRule {
  BasisKind kind = BasisKind::minimal;
  std::size_t t = 0;
  std::size_t first = 2;
  std::size_t latest = 2;

  static BasisRule minimal() { return {}; }
  static BasisRule gradient_span() { return {BasisKind::gradient_span, 0, 0, 0}; }
  static BasisRule windowed(std::size_t t) { return {BasisKind::windowed, t, 0, 0}; }
  static BasisRule anchored(std::size_t first = 2, std::size_t latest = 2) {
    return {BasisKind::anchored, 0, first, latest};
  }
  static BasisRule five_column() { return anchored(2, 2); }

  std::string name() const;
  /// Parses "minimal", "span", "window:<t>", "anchored:<a>:<b>" or "five".
  static BasisRule parse(const std::string& text);
};

/// Thin QR S = Z R built by appending columns with classical Gram–Schmidt and
/// one re-orthogonalization pass. A column whose residual after
/// orthogonalization is at most `drop_tol` times its norm is rejected.
template <class T>
class SubspaceBasis {
 public:
  static constexpr double kDropTol = 1e-12;
  static constexpr std::size_t kRefactorEvery = 50;

  explicit SubspaceBasis(std::size_t n = 0) : n_(n) {}

  /// Returns false (and records the column as dropped) if it is numerically
  /// dependent on the current basis.
  bool append(const Vector<T>& s);

  /// Rebuilds Z and R from the accepted columns of S.
  void refactor();

  std::size_t dimension() const { return n_; }
  std::size_t q() const { return z_.size(); }
  std::size_t dropped() const { return dropped_; }
  const std::vector<Vector<T>>& z() const { return z_; }
  const std::vector<Vector<T>>& s() const { return s_; }

  /// R as a q×q upper-triangular matrix.
  Matrix<T> r() const;
  /// Z as an n×q matrix.
  Matrix<T> z_matrix() const;
  /// Zᵀ v
  Vector<T> project(const Vector<T>& v) const;
  /// Z u
  Vector<T> expand(const Vector<T>& u) const;

 private:
  bool orthogonalize_into(const Vector<T>& s, Vector<T>& zcol, Vector<T>& rcol) const;

  std::size_t n_;
  std::vector<Vector<T>> s_;    // accepted spanning columns
  std::vector<Vector<T>> z_;    // orthonormal columns
  std::vector<Vector<T>> rcols_;  // column j of R (length j+1)
  std::size_t dropped_ = 0;
  std::size_t appends_since_refactor_ = 0;
};

/// Spanning columns the rule selects at the latest history index.
template <class T>
std::vector<Vector<T>> basis_columns(const IterHistory<T>& h, const BasisRule& rule);

/// Throws InvalidRule when no column survives.
template <class T>
SubspaceBasis<T> build_basis(const IterHistory<T>& h, const BasisRule& rule);

/// Solves (ZᵀBZ) u = Zᵀ rhs and returns Z u. Throws SingularSystem for a
/// singular reduced matrix and NotSpd when `enforce_spd` is set and ZᵀBZ is
/// not positive definite.
template <class T>
Vector<T> reduced_direction(const SubspaceBasis<T>& basis,
                            const std::function<Vector<T>(const Vector<T>&)>& apply_b,
                            const Vector<T>& rhs, bool enforce_spd = false);

}  // namespace qnlab
