#pragma once

#include <cstddef>
#include <vector>

#include "qnlab/preconditioner.hpp"

namespace qnlab {

/// Per-iteration sequences of an exact-linesearch run.
///
/// After k completed steps the history holds x_0..x_k and g_0..g_k, and
/// p_i, α_i, g_iᵀp_i, φ_i for i < k. B0⁻¹g_i and g_iᵀB0⁻¹g_i are cached for
/// every recorded gradient.
template <class T>
class IterHistory {
 public:
  IterHistory() = default;
  explicit IterHistory(Preconditioner<T> b0) : b0_(std::move(b0)) {}

  void start(Vector<T> x0, Vector<T> g0) {
    x_.clear();
    g_.clear();
    p_.clear();
    alpha_.clear();
    gp_.clear();
    phi_.clear();
    binv_g_.clear();
    gbg_.clear();
    x_.push_back(std::move(x0));
    push_gradient(std::move(g0));
  }

  /// Appends step k: direction p_k with steplength α_k reaching (x_{k+1}, g_{k+1}).
  void record_step(Vector<T> p, T alpha, double phi, Vector<T> x_next, Vector<T> g_next) {
    check_same_size(p.size(), g_.back().size(), "record_step");
    gp_.push_back(dot(g_.back(), p));
    p_.push_back(std::move(p));
    alpha_.push_back(std::move(alpha));
    phi_.push_back(phi);
    x_.push_back(std::move(x_next));
    push_gradient(std::move(g_next));
  }

  std::size_t dimension() const { return g_.empty() ? 0 : g_.front().size(); }
  /// Index k of the latest gradient.
  std::size_t current() const { return g_.size() - 1; }
  std::size_t steps() const { return p_.size(); }

  const Vector<T>& x(std::size_t i) const { return x_.at(i); }
  const Vector<T>& g(std::size_t i) const { return g_.at(i); }
  const Vector<T>& p(std::size_t i) const { return p_.at(i); }
  const T& alpha(std::size_t i) const { return alpha_.at(i); }
  const T& gp(std::size_t i) const { return gp_.at(i); }
  double phi(std::size_t i) const { return phi_.at(i); }
  const Vector<T>& binv_g(std::size_t i) const { return binv_g_.at(i); }
  const T& gbg(std::size_t i) const { return gbg_.at(i); }

  Vector<T> s(std::size_t i) const { return sub(x_.at(i + 1), x_.at(i)); }
  /// α_i p_i, the step as taken (equals s_i up to rounding).
  Vector<T> step(std::size_t i) const { return scaled(alpha_.at(i), p_.at(i)); }
  Vector<T> y(std::size_t i) const { return sub(g_.at(i + 1), g_.at(i)); }

  /// ρ^B_i = −1/(α_i g_iᵀp_i), the secant value 1/y_iᵀs_i under exact linesearch.
  T rho_secant(std::size_t i) const { return T(-1) / (alpha_.at(i) * gp_.at(i)); }

  const Preconditioner<T>& b0() const { return b0_; }

  const std::vector<Vector<T>>& xs() const { return x_; }
  const std::vector<Vector<T>>& gs() const { return g_; }
  const std::vector<Vector<T>>& ps() const { return p_; }

 private:
  void push_gradient(Vector<T> g) {
    Vector<T> bg = b0_.solve(g);
    gbg_.push_back(dot(g, bg));
    binv_g_.push_back(std::move(bg));
    g_.push_back(std::move(g));
  }

  Preconditioner<T> b0_;
  std::vector<Vector<T>> x_, g_, p_, binv_g_;
  std::vector<T> alpha_, gp_, gbg_;
  std::vector<double> phi_;
};

}  // namespace qnlab
