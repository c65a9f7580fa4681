#pragma once

// Compact representations of Broyden-class matrices built from a recorded
// history:
//   B_k = B0 + G_k T_k G_kᵀ,      G_k = [g_0 … g_k], T_k tridiagonal,
//   B_k^BFGS = B0 + Υ_k D_k Υ_kᵀ, Υ_k = [g_0 y_0 … g_{k−1} y_{k−1}], D_k diagonal.

#include <optional>
#include <vector>

#include "qnlab/history.hpp"

namespace qnlab {

/// T_k = T^C + T^φ, both symmetric tridiagonal of size k+1.
template <class T>
struct TkMatrix {
  std::vector<T> diag_c;
  std::vector<T> off_c;  // (i+1, i) entries
  std::vector<T> diag_phi;
  std::vector<T> off_phi;

  std::size_t size() const { return diag_c.size(); }
  T diag(std::size_t i) const { return diag_c[i] + diag_phi[i]; }
  T off(std::size_t i) const { return off_c[i] + off_phi[i]; }

  Matrix<T> dense() const;
  Matrix<T> dense_c() const;
  Matrix<T> dense_phi() const;
};

/// Entries of T_k from g_iᵀp_i, α_i and y_iᵀp_i for i < k = h.current(), with
/// φ_i taken from `phi` (or the history's recorded φ when empty). Throws
/// DegenerateHistory on a zero denominator and InvalidInput when k = 0.
template <class T>
TkMatrix<T> build_tk(const IterHistory<T>& h, const std::vector<double>& phi = {});

template <class T>
struct CompactBroydenRep {
  Preconditioner<T> b0;
  std::vector<Vector<T>> g;  // columns of G_k
  TkMatrix<T> tk;

  std::size_t dimension() const { return g.empty() ? 0 : g.front().size(); }
  Matrix<T> dense() const;
  Vector<T> apply(const Vector<T>& v) const;
};

template <class T>
CompactBroydenRep<T> compact_broyden(const IterHistory<T>& h, const std::vector<double>& phi = {});

template <class T>
struct DiagonalBfgsRep {
  Preconditioner<T> b0;
  std::size_t n = 0;
  std::vector<Vector<T>> upsilon;  // g_0, y_0, g_1, y_1, …
  std::vector<T> d;                // 1/g_iᵀp_i, 1/y_iᵀs_i, …
  std::vector<T> d_inv;            // g_iᵀp_i, y_iᵀs_i, … (exact reciprocals of d)

  Matrix<T> dense() const;
  Vector<T> apply(const Vector<T>& v) const;
};

/// s_i is taken as α_i p_i. Throws DegenerateHistory when g_iᵀp_i = 0 or y_iᵀs_i = 0.
template <class T>
DiagonalBfgsRep<T> build_bfgs_diagonal(const IterHistory<T>& h);

/// E_k, (k+1)×2k, with G_k E_k = Υ_k: column 2i is e_i and column 2i+1 is e_{i+1} − e_i.
std::vector<std::vector<int>> ek_transform(std::size_t k);

/// Capacitance matrices of the inverse formulas:
///   T_k⁻¹ + G_kᵀB0⁻¹G_k   and   D_k⁻¹ + Υ_kᵀB0⁻¹Υ_k.
template <class T>
Matrix<T> smw_capacitance(const CompactBroydenRep<T>& rep);
template <class T>
Matrix<T> smw_capacitance(const DiagonalBfgsRep<T>& rep);

/// B_k⁻¹ v = B0⁻¹v − B0⁻¹W C⁻¹ WᵀB0⁻¹v without forming B_k⁻¹. Throws
/// SingularSystem (a Breakdown) when T_k or the capacitance is singular.
template <class T>
Vector<T> smw_inverse_apply(const CompactBroydenRep<T>& rep, const Vector<T>& v);
template <class T>
Vector<T> smw_inverse_apply(const DiagonalBfgsRep<T>& rep, const Vector<T>& v);

/// Given A x = b, returns y = x / (1 + γ bᵀx), which solves (A + γ b bᵀ) y = b.
template <class T>
struct RankOneSolve {
  Vector<T> y;
  /// 1/bᵀy − 1/bᵀx − γ when bᵀx ≠ 0.
  std::optional<T> scaling_residual;
};

/// Throws Breakdown when 1 + γ bᵀx = 0.
template <class T>
RankOneSolve<T> rank_one_solve(const Vector<T>& x, const Vector<T>& b, const T& gamma);

struct PdVerdict {
  bool pd = false;
  double min_eigenvalue = 0.0;
};

/// Forms B0 + Σ_{i<k} (−g_i g_iᵀ/(g_iᵀB0⁻¹g_i) + ρ_i v_i v_iᵀ), v_i = Σ_j m_ij g_j,
/// and reports its definiteness by the smallest eigenvalue.
///
/// Preconditions checked (InvalidInput): `mcoef` is k×(k+1) with zero row
/// sums and full row rank; the gradients are pairwise B0⁻¹-conjugate to a
/// relative 1e-8.
template <class T>
PdVerdict stabilized_pd_check(const Preconditioner<T>& b0, const std::vector<Vector<T>>& gradients,
                              const std::vector<T>& rho, const Matrix<double>& mcoef);

/// The k×(k+1) difference pattern m_{i,i} = −1, m_{i,i+1} = 1.
Matrix<double> difference_pattern(std::size_t k);

}  // namespace qnlab
