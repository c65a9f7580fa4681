#include "qnlab/reduced.hpp"

#include <sstream>

namespace qnlab {

std::string BasisRule::name() const {
  switch (kind) {
    case BasisKind::minimal:
      return "minimal";
    case BasisKind::gradient_span:
      return "span";
    case BasisKind::windowed:
      return "window:" + std::to_string(t);
    case BasisKind::anchored:
      if (first == 2 && latest == 2) return "five";
      return "anchored:" + std::to_string(first) + ":" + std::to_string(latest);
  }
  return "?";
}

BasisRule BasisRule::parse(const std::string& text) {
  if (text == "minimal") return minimal();
  if (text == "span") return gradient_span();
  if (text == "five") return five_column();
  std::istringstream is(text);
  std::string head;
  std::getline(is, head, ':');
  if (head == "window") {
    std::size_t t = 0;
    if (is >> t) return windowed(t);
  } else if (head == "anchored") {
    std::size_t a = 0, b = 0;
    char colon = 0;
    if ((is >> a >> colon >> b) && colon == ':') return anchored(a, b);
  }
  throw InvalidRule("unknown basis rule: " + text);
}

template <class T>
bool SubspaceBasis<T>::orthogonalize_into(const Vector<T>& s, Vector<T>& zcol, Vector<T>& rcol) const {
  const T snorm = norm2(s);
  rcol.assign(z_.size() + 1, T(0));
  if (snorm == T(0)) return false;
  zcol = s;
  for (int pass = 0; pass < 2; ++pass) {
    Vector<T> coeffs(z_.size(), T(0));
    for (std::size_t j = 0; j < z_.size(); ++j) coeffs[j] = dot(z_[j], zcol);
    for (std::size_t j = 0; j < z_.size(); ++j) {
      axpy(-coeffs[j], z_[j], zcol);
      rcol[j] += coeffs[j];
    }
  }
  const T res = norm2(zcol);
  if (!(res > snorm * T(kDropTol))) return false;
  for (auto& v : zcol) v /= res;
  rcol.back() = res;
  return true;
}

template <class T>
bool SubspaceBasis<T>::append(const Vector<T>& s) {
  check_same_size(s.size(), n_, "SubspaceBasis::append");
  if (z_.size() >= n_) {
    ++dropped_;
    return false;
  }
  Vector<T> zcol, rcol;
  if (!orthogonalize_into(s, zcol, rcol)) {
    ++dropped_;
    return false;
  }
  s_.push_back(s);
  z_.push_back(std::move(zcol));
  rcols_.push_back(std::move(rcol));
  if (++appends_since_refactor_ >= kRefactorEvery) refactor();
  return true;
}

template <class T>
void SubspaceBasis<T>::refactor() {
  std::vector<Vector<T>> cols = std::move(s_);
  s_.clear();
  z_.clear();
  rcols_.clear();
  appends_since_refactor_ = 0;
  for (const auto& c : cols) {
    Vector<T> zcol, rcol;
    if (orthogonalize_into(c, zcol, rcol)) {
      s_.push_back(c);
      z_.push_back(std::move(zcol));
      rcols_.push_back(std::move(rcol));
    } else {
      ++dropped_;
    }
  }
}

template <class T>
Matrix<T> SubspaceBasis<T>::r() const {
  Matrix<T> out(q(), q());
  for (std::size_t j = 0; j < q(); ++j)
    for (std::size_t i = 0; i <= j; ++i) out(i, j) = rcols_[j][i];
  return out;
}

template <class T>
Matrix<T> SubspaceBasis<T>::z_matrix() const {
  Matrix<T> out(n_, q());
  for (std::size_t j = 0; j < q(); ++j) out.set_column(j, z_[j]);
  return out;
}

template <class T>
Vector<T> SubspaceBasis<T>::project(const Vector<T>& v) const {
  Vector<T> out(q());
  for (std::size_t j = 0; j < q(); ++j) out[j] = dot(z_[j], v);
  return out;
}

template <class T>
Vector<T> SubspaceBasis<T>::expand(const Vector<T>& u) const {
  check_same_size(u.size(), q(), "SubspaceBasis::expand");
  Vector<T> out(n_, T(0));
  for (std::size_t j = 0; j < q(); ++j) axpy(u[j], z_[j], out);
  return out;
}

template <class T>
std::vector<Vector<T>> basis_columns(const IterHistory<T>& h, const BasisRule& rule) {
  const std::size_t k = h.current();
  std::vector<Vector<T>> cols;
  switch (rule.kind) {
    case BasisKind::minimal:
      if (k >= 1) cols.push_back(h.p(k - 1));
      cols.push_back(h.binv_g(k));
      break;
    case BasisKind::gradient_span:
      for (std::size_t i = 0; i <= k; ++i) cols.push_back(h.binv_g(i));
      break;
    case BasisKind::windowed: {
      const std::size_t t = std::min(rule.t, k);
      if (t >= 1) cols.push_back(h.p(t - 1));
      for (std::size_t i = t; i <= k; ++i) cols.push_back(h.binv_g(i));
      break;
    }
    case BasisKind::anchored:
      if (k <= rule.first + rule.latest) {
        for (std::size_t i = 0; i < k; ++i) cols.push_back(h.p(i));
      } else {
        for (std::size_t i = 0; i < rule.first; ++i) cols.push_back(h.p(i));
        for (std::size_t i = k - rule.latest; i < k; ++i) cols.push_back(h.p(i));
      }
      cols.push_back(h.binv_g(k));
      break;
  }
  return cols;
}

template <class T>
SubspaceBasis<T> build_basis(const IterHistory<T>& h, const BasisRule& rule) {
  SubspaceBasis<T> basis(h.dimension());
  for (const auto& c : basis_columns(h, rule)) basis.append(c);
  if (basis.q() == 0) throw InvalidRule("basis rule " + rule.name() + " produced an empty basis");
  return basis;
}

template <class T>
Vector<T> reduced_direction(const SubspaceBasis<T>& basis,
                            const std::function<Vector<T>(const Vector<T>&)>& apply_b, const Vector<T>& rhs,
                            bool enforce_spd) {
  const std::size_t q = basis.q();
  if (q == 0) throw InvalidRule("reduced_direction: empty basis");
  std::vector<Vector<T>> bz;
  bz.reserve(q);
  for (const auto& z : basis.z()) bz.push_back(apply_b(z));
  Matrix<T> m(q, q);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i; j < q; ++j) {
      const T v = (dot(basis.z()[i], bz[j]) + dot(basis.z()[j], bz[i])) / T(2);
      m(i, j) = v;
      m(j, i) = v;
    }
  SymmetricIndefiniteFactor<T> f(m);
  if (enforce_spd && f.inertia().second != 0) throw NotSpd("reduced matrix is not positive definite");
  return basis.expand(f.solve(basis.project(rhs)));
}

#define QNLAB_INSTANTIATE(T)                                                                     \
  template class SubspaceBasis<T>;                                                               \
  template std::vector<Vector<T>> basis_columns<T>(const IterHistory<T>&, const BasisRule&);     \
  template SubspaceBasis<T> build_basis<T>(const IterHistory<T>&, const BasisRule&);             \
  template Vector<T> reduced_direction<T>(const SubspaceBasis<T>&,                               \
                                          const std::function<Vector<T>(const Vector<T>&)>&,     \
                                          const Vector<T>&, bool);

QNLAB_INSTANTIATE(double)
QNLAB_INSTANTIATE(BigFloat)

#undef QNLAB_INSTANTIATE

}  // namespace qnlab
