#include "qnlab/compact.hpp"

#include <cmath>

namespace qnlab {

template <class T>
Matrix<T> TkMatrix<T>::dense_c() const {
  const std::size_t m = size();
  Matrix<T> out(m, m);
  for (std::size_t i = 0; i < m; ++i) out(i, i) = diag_c[i];
  for (std::size_t i = 0; i + 1 < m; ++i) {
    out(i + 1, i) = off_c[i];
    out(i, i + 1) = off_c[i];
  }
  return out;
}

template <class T>
Matrix<T> TkMatrix<T>::dense_phi() const {
  const std::size_t m = size();
  Matrix<T> out(m, m);
  for (std::size_t i = 0; i < m; ++i) out(i, i) = diag_phi[i];
  for (std::size_t i = 0; i + 1 < m; ++i) {
    out(i + 1, i) = off_phi[i];
    out(i, i + 1) = off_phi[i];
  }
  return out;
}

template <class T>
Matrix<T> TkMatrix<T>::dense() const {
  return add(dense_c(), dense_phi());
}

template <class T>
TkMatrix<T> build_tk(const IterHistory<T>& h, const std::vector<double>& phi_in) {
  const std::size_t k = h.current();
  if (k == 0) throw InvalidInput("build_tk needs at least one recorded step");
  auto phi = [&](std::size_t i) { return phi_in.empty() ? h.phi(i) : phi_in.at(i); };

  // Per step i < k: η_i = 1/g_iᵀp_i, r_i = 1/(α_i y_iᵀp_i), and the φ pieces
  // a_i = 1/y_iᵀp_i, b_i = a_i + η_i of ω_i = (−g_iᵀp_i)^{1/2}(a_i g_{i+1} − b_i g_i).
  std::vector<T> eta(k), r(k), gp(k), a(k), b(k);
  for (std::size_t i = 0; i < k; ++i) {
    gp[i] = h.gp(i);
    const T yp = dot(h.y(i), h.p(i));
    if (gp[i] == T(0)) throw DegenerateHistory("build_tk: g_iᵀp_i = 0 at i = " + std::to_string(i));
    const T ayp = h.alpha(i) * yp;
    if (ayp == T(0)) throw DegenerateHistory("build_tk: α_i y_iᵀp_i = 0 at i = " + std::to_string(i));
    eta[i] = T(1) / gp[i];
    r[i] = T(1) / ayp;
    a[i] = T(1) / yp;
    b[i] = a[i] + eta[i];
  }

  TkMatrix<T> t;
  t.diag_c.assign(k + 1, T(0));
  t.off_c.assign(k, T(0));
  t.diag_phi.assign(k + 1, T(0));
  t.off_phi.assign(k, T(0));
  for (std::size_t i = 0; i < k; ++i) {
    t.diag_c[i] += eta[i] + r[i];
    t.diag_c[i + 1] += r[i];
    t.off_c[i] = -r[i];

    const double ph = phi(i);
    if (ph != 0.0) {
      // φ_i ω_i ω_iᵀ = φ_i(−g_iᵀp_i)[a² g_{i+1}g_{i+1}ᵀ + b² g_i g_iᵀ − ab(g_{i+1}g_iᵀ + g_i g_{i+1}ᵀ)]
      const T f = T(ph) * gp[i];
      t.diag_phi[i] -= f * b[i] * b[i];
      t.diag_phi[i + 1] -= f * a[i] * a[i];
      t.off_phi[i] = f * a[i] * b[i];
    }
  }
  return t;
}

template <class T>
Matrix<T> CompactBroydenRep<T>::dense() const {
  const std::size_t n = dimension();
  Matrix<T> out = b0.dense(n);
  const std::size_t m = tk.size();
  for (std::size_t i = 0; i < m; ++i) {
    add_sym_outer(out, tk.diag(i), g[i]);
    if (i + 1 < m) {
      const T o = tk.off(i);
      add_outer(out, o, g[i + 1], g[i]);
      add_outer(out, o, g[i], g[i + 1]);
    }
  }
  return out;
}

template <class T>
Vector<T> CompactBroydenRep<T>::apply(const Vector<T>& v) const {
  const std::size_t m = tk.size();
  std::vector<T> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = dot(g[i], v);
  Vector<T> out = b0.apply(v);
  for (std::size_t i = 0; i < m; ++i) {
    T ti = tk.diag(i) * w[i];
    if (i > 0) ti += tk.off(i - 1) * w[i - 1];
    if (i + 1 < m) ti += tk.off(i) * w[i + 1];
    axpy(ti, g[i], out);
  }
  return out;
}

template <class T>
CompactBroydenRep<T> compact_broyden(const IterHistory<T>& h, const std::vector<double>& phi) {
  CompactBroydenRep<T> rep;
  rep.b0 = h.b0();
  rep.tk = build_tk(h, phi);
  for (std::size_t i = 0; i <= h.current(); ++i) rep.g.push_back(h.g(i));
  return rep;
}

template <class T>
Matrix<T> DiagonalBfgsRep<T>::dense() const {
  Matrix<T> out = b0.dense(n);
  for (std::size_t j = 0; j < upsilon.size(); ++j) add_sym_outer(out, d[j], upsilon[j]);
  return out;
}

template <class T>
Vector<T> DiagonalBfgsRep<T>::apply(const Vector<T>& v) const {
  Vector<T> out = b0.apply(v);
  for (std::size_t j = 0; j < upsilon.size(); ++j) axpy(d[j] * dot(upsilon[j], v), upsilon[j], out);
  return out;
}

template <class T>
DiagonalBfgsRep<T> build_bfgs_diagonal(const IterHistory<T>& h) {
  const std::size_t k = h.current();
  if (k == 0) throw InvalidInput("build_bfgs_diagonal needs at least one recorded step");
  DiagonalBfgsRep<T> rep;
  rep.b0 = h.b0();
  rep.n = h.dimension();
  for (std::size_t i = 0; i < k; ++i) {
    const T& gp = h.gp(i);
    const Vector<T> y = h.y(i);
    const T ys = h.alpha(i) * dot(y, h.p(i));
    if (gp == T(0)) throw DegenerateHistory("build_bfgs_diagonal: g_iᵀp_i = 0");
    if (ys == T(0)) throw DegenerateHistory("build_bfgs_diagonal: y_iᵀs_i = 0");
    rep.upsilon.push_back(h.g(i));
    rep.d.push_back(T(1) / gp);
    rep.d_inv.push_back(gp);
    rep.upsilon.push_back(y);
    rep.d.push_back(T(1) / ys);
    rep.d_inv.push_back(ys);
  }
  return rep;
}

std::vector<std::vector<int>> ek_transform(std::size_t k) {
  std::vector<std::vector<int>> e(k + 1, std::vector<int>(2 * k, 0));
  for (std::size_t i = 0; i < k; ++i) {
    e[i][2 * i] = 1;
    e[i][2 * i + 1] = -1;
    e[i + 1][2 * i + 1] = 1;
  }
  return e;
}

namespace {

template <class T>
Matrix<T> gram_b0inv(const Preconditioner<T>& b0, const std::vector<Vector<T>>& cols) {
  const std::size_t m = cols.size();
  std::vector<Vector<T>> bc;
  bc.reserve(m);
  for (const auto& c : cols) bc.push_back(b0.solve(c));
  Matrix<T> out(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const T v = dot(cols[i], bc[j]);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

template <class T>
Vector<T> smw_apply(const Preconditioner<T>& b0, const std::vector<Vector<T>>& cols, const Matrix<T>& cap,
                    const Vector<T>& v) {
  Vector<T> bv = b0.solve(v);
  if (cols.empty()) return bv;
  Vector<T> w(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) w[i] = dot(cols[i], bv);
  const Vector<T> z = solve_symmetric(cap, w);
  Vector<T> corr(v.size(), T(0));
  for (std::size_t i = 0; i < cols.size(); ++i) axpy(z[i], cols[i], corr);
  axpy(T(-1), b0.solve(corr), bv);
  return bv;
}

template <class T>
Matrix<T> symmetric_inverse(const Matrix<T>& a) {
  const std::size_t m = a.rows();
  SymmetricIndefiniteFactor<T> f(a);
  Matrix<T> inv(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    Vector<T> e(m, T(0));
    e[j] = T(1);
    inv.set_column(j, f.solve(e));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const T avg = (inv(i, j) + inv(j, i)) / T(2);
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  return inv;
}

}  // namespace

template <class T>
Matrix<T> smw_capacitance(const CompactBroydenRep<T>& rep) {
  return add(symmetric_inverse(rep.tk.dense()), gram_b0inv(rep.b0, rep.g));
}

template <class T>
Matrix<T> smw_capacitance(const DiagonalBfgsRep<T>& rep) {
  Matrix<T> cap = gram_b0inv(rep.b0, rep.upsilon);
  for (std::size_t i = 0; i < rep.d_inv.size(); ++i) cap(i, i) += rep.d_inv[i];
  return cap;
}

template <class T>
Vector<T> smw_inverse_apply(const CompactBroydenRep<T>& rep, const Vector<T>& v) {
  if (rep.tk.size() == 0) return rep.b0.solve(v);
  // G_k D⁻¹ with unit B0⁻¹-norm columns and D T_k D in place of T_k: the
  // gradients shrink by orders of magnitude along a run, and unscaled the
  // capacitance matrix becomes numerically singular long before B_k does.
  const std::size_t m = rep.g.size();
  std::vector<T> d(m);
  std::vector<Vector<T>> w;
  w.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    d[i] = sqrt_checked(dot(rep.g[i], rep.b0.solve(rep.g[i])));
    if (d[i] == T(0)) d[i] = T(1);
    w.push_back(scaled(T(1) / d[i], rep.g[i]));
  }
  Matrix<T> t = rep.tk.dense();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t(i, j) *= d[i] * d[j];
  return smw_apply(rep.b0, w, add(symmetric_inverse(t), gram_b0inv(rep.b0, w)), v);
}

template <class T>
Vector<T> smw_inverse_apply(const DiagonalBfgsRep<T>& rep, const Vector<T>& v) {
  if (rep.upsilon.empty()) return rep.b0.solve(v);
  return smw_apply(rep.b0, rep.upsilon, smw_capacitance(rep), v);
}

template <class T>
RankOneSolve<T> rank_one_solve(const Vector<T>& x, const Vector<T>& b, const T& gamma) {
  const T bx = dot(b, x);
  const T denom = T(1) + gamma * bx;
  if (denom == T(0)) throw Breakdown("rank_one_solve: 1 + γ bᵀx = 0");
  RankOneSolve<T> out;
  out.y = scaled(T(1) / denom, x);
  if (!(bx == T(0))) {
    const T by = dot(b, out.y);
    out.scaling_residual = T(1) / by - T(1) / bx - gamma;
  }
  return out;
}

Matrix<double> difference_pattern(std::size_t k) {
  Matrix<double> m(k, k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = -1.0;
    m(i, i + 1) = 1.0;
  }
  return m;
}

template <class T>
PdVerdict stabilized_pd_check(const Preconditioner<T>& b0, const std::vector<Vector<T>>& gradients,
                              const std::vector<T>& rho, const Matrix<double>& mcoef) {
  if (gradients.empty()) throw InvalidInput("stabilized_pd_check: no gradients");
  const std::size_t k = gradients.size() - 1;
  const std::size_t n = gradients.front().size();
  if (mcoef.rows() != k || mcoef.cols() != k + 1) throw InvalidInput("stabilized_pd_check: Mcoef must be k×(k+1)");
  if (rho.size() != k) throw InvalidInput("stabilized_pd_check: need k values of ρ");

  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0, mag = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      sum += mcoef(i, j);
      mag += std::fabs(mcoef(i, j));
    }
    if (std::fabs(sum) > 1e-12 * std::max(1.0, mag)) {
      throw InvalidInput("stabilized_pd_check: Mcoef row " + std::to_string(i) + " does not sum to zero");
    }
  }

  if (k > 0) {
    const auto qr = householder_qr(transpose(mcoef));
    double rmax = 0.0;
    for (std::size_t i = 0; i < k; ++i) rmax = std::max(rmax, std::fabs(qr.second(i, i)));
    for (std::size_t i = 0; i < k; ++i) {
      if (!(std::fabs(qr.second(i, i)) > 1e-10 * rmax)) {
        throw InvalidInput("stabilized_pd_check: Mcoef is not of full row rank");
      }
    }
  }

  const Matrix<T> gram = gram_b0inv(b0, gradients);
  for (std::size_t i = 0; i <= k; ++i) {
    if (!(gram(i, i) > T(0))) throw InvalidInput("stabilized_pd_check: zero gradient");
    for (std::size_t j = i + 1; j <= k; ++j) {
      const T scale = sqrt_checked(gram(i, i) * gram(j, j));
      if (abs_value(gram(i, j)) > scale * T(1e-8)) {
        throw InvalidInput("stabilized_pd_check: gradients are not conjugate with respect to B0⁻¹");
      }
    }
  }

  Matrix<T> b = b0.dense(n);
  for (std::size_t i = 0; i < k; ++i) {
    add_sym_outer(b, T(-1) / gram(i, i), gradients[i]);
    Vector<T> v(n, T(0));
    for (std::size_t j = 0; j <= k; ++j)
      if (mcoef(i, j) != 0.0) axpy(T(mcoef(i, j)), gradients[j], v);
    add_sym_outer(b, rho[i], v);
  }
  const Vector<T> eig = symmetric_eigenvalues(b);
  PdVerdict out;
  out.min_eigenvalue = to_double(eig.front());
  out.pd = eig.front() > T(0);
  return out;
}

#define QNLAB_INSTANTIATE(T)                                                                                \
  template struct TkMatrix<T>;                                                                              \
  template TkMatrix<T> build_tk<T>(const IterHistory<T>&, const std::vector<double>&);                      \
  template struct CompactBroydenRep<T>;                                                                     \
  template CompactBroydenRep<T> compact_broyden<T>(const IterHistory<T>&, const std::vector<double>&);      \
  template struct DiagonalBfgsRep<T>;                                                                       \
  template DiagonalBfgsRep<T> build_bfgs_diagonal<T>(const IterHistory<T>&);                                \
  template Matrix<T> smw_capacitance<T>(const CompactBroydenRep<T>&);                                       \
  template Matrix<T> smw_capacitance<T>(const DiagonalBfgsRep<T>&);                                         \
  template Vector<T> smw_inverse_apply<T>(const CompactBroydenRep<T>&, const Vector<T>&);                   \
  template Vector<T> smw_inverse_apply<T>(const DiagonalBfgsRep<T>&, const Vector<T>&);                     \
  template RankOneSolve<T> rank_one_solve<T>(const Vector<T>&, const Vector<T>&, const T&);                 \
  template PdVerdict stabilized_pd_check<T>(const Preconditioner<T>&, const std::vector<Vector<T>>&,        \
                                            const std::vector<T>&, const Matrix<double>&);

QNLAB_INSTANTIATE(double)
QNLAB_INSTANTIATE(BigFloat)

#undef QNLAB_INSTANTIATE

}  // namespace qnlab
