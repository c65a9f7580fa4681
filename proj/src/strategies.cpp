#include "qnlab/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnlab/random.hpp"

namespace qnlab {

std::string to_string(Family f) {
  switch (f) {
    case Family::pcg:
      return "pcg";
    case Family::broyden:
      return "broyden";
    case Family::bfgs:
      return "bfgs";
    case Family::mup:
      return "mup";
    case Family::lc:
      return "lc";
    case Family::sympcgs:
      return "sympcgs";
    case Family::lbfgs:
      return "lbfgs";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "pcg") return Family::pcg;
  if (t == "broyden" || t == "broyden-recursive" || t == "dfp") return Family::broyden;
  if (t == "bfgs") return Family::bfgs;
  if (t == "mup") return Family::mup;
  if (t == "lc") return Family::lc;
  if (t == "sympcgs") return Family::sympcgs;
  if (t == "lbfgs" || t == "l-bfgs") return Family::lbfgs;
  throw InvalidSpec("unknown method family: " + s);
}

double PhiSchedule::at(std::size_t k, double gbg) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::values:
      return k < values.size() ? values[k] : 0.0;
    case Kind::random_admissible: {
      SeededRng rng = keyed_rng(seed, k);
      // Open at the lower end: u ∈ (0, 1].
      const double u = 1.0 - rng.uniform();
      const double lo = lo_factor / gbg;
      return lo + u * (hi - lo);
    }
  }
  return 0.0;
}

std::vector<double> RhoSchedule::multipliers(std::size_t k, std::size_t count) const {
  std::vector<double> xi(count, 1.0);
  if (kind == Kind::secant) return xi;
  SeededRng rng = keyed_rng(seed, k);
  const double span = std::log(hi / lo);
  for (auto& v : xi) {
    const double z = rng.normal();
    const double u = std::erf(std::fabs(z) / std::numbers::sqrt2);
    v = lo * std::exp(u * span);
  }
  return xi;
}

std::string RhoSchedule::name() const {
  if (kind == Kind::secant) return "secant";
  std::ostringstream os;
  os << "random:" << lo << ":" << hi;
  return os.str();
}

RhoSchedule RhoSchedule::parse(const std::string& text, std::uint64_t seed) {
  if (text == "secant") return secant();
  std::istringstream is(text);
  std::string head;
  std::getline(is, head, ':');
  double lo = 0, hi = 0;
  char colon = 0;
  if (head == "random" && (is >> lo >> colon >> hi) && colon == ':' && lo > 0 && hi >= lo) {
    return scaled_random(lo, hi, seed);
  }
  throw InvalidSpec("rho schedule must be 'secant' or 'random:<lo>:<hi>' with 0 < lo <= hi: " + text);
}

void StrategyConfig::validate(std::size_t n) const {
  if (memory == 0) throw InvalidSpec("memory m must be positive");
  if (b0 && (b0->rows() != n || b0->cols() != n)) throw InvalidSpec("B0 dimension does not match the problem");
  if (rho.kind == RhoSchedule::Kind::scaled_random && !(rho.lo > 0.0 && rho.hi >= rho.lo)) {
    throw InvalidSpec("rho range must satisfy 0 < lo <= hi");
  }
  if (solve == SolveMode::reduced && family != Family::mup && family != Family::lc && family != Family::sympcgs) {
    throw InvalidSpec("reduced solves apply to mup, lc and sympcgs only");
  }
  if (phi.kind == PhiSchedule::Kind::random_admissible && !(phi.lo_factor > -1.0 && phi.hi > 0.0)) {
    throw InvalidSpec("random phi range must lie inside (-1/gBg, inf)");
  }
}

std::string StrategyConfig::name() const {
  if (!label.empty()) return label;
  const bool limited = memory != kUnlimited;
  const std::string zero = policy == MemoryPolicy::keep_first ? "-0" : "";
  const std::string mem = limited ? "(m=" + std::to_string(memory) + ")" : "";
  switch (family) {
    case Family::pcg:
      return "PCG";
    case Family::bfgs:
      return "BFGS";
    case Family::broyden:
      if (phi.kind == PhiSchedule::Kind::constant && phi.value == 1.0) return "DFP";
      return "Broyden";
    case Family::mup:
      return "MuP";
    case Family::lc:
      return "LC" + zero + mem;
    case Family::sympcgs:
      return "symPCGs" + zero + mem;
    case Family::lbfgs:
      return "L-BFGS" + zero + mem;
  }
  return "?";
}

// ---------------------------------------------------------------------------

template <class T>
Vector<T> dense_solve(const Matrix<T>& b, const Vector<T>& rhs, bool enforce_spd) {
  SymmetricIndefiniteFactor<T> f(b);
  if (enforce_spd && f.inertia().second != 0) throw NotSpd("system matrix is not positive definite");
  return f.solve(rhs);
}

template <class T>
Vector<T> pcg_direction(const IterHistory<T>& h) {
  const std::size_t k = h.current();
  Vector<T> p = negated(h.binv_g(k));
  if (k == 0) return p;
  if (h.gbg(k - 1) == T(0)) throw Breakdown("pcg: previous gradient has zero B0-norm");
  axpy(h.gbg(k) / h.gbg(k - 1), h.p(k - 1), p);
  return p;
}

template <class T>
const Vector<T>& PcgRecurrence<T>::next(const IterHistory<T>& h) {
  const std::size_t k = h.current();
  if (started_ && k != k_ + 1) throw InvalidInput("PcgRecurrence: indices must advance by one");
  if (!started_ && k != 0) throw InvalidInput("PcgRecurrence: must start at index 0");
  Vector<T> p = negated(h.binv_g(k));
  if (started_) {
    if (gbg_prev_ == T(0)) throw Breakdown("pcg: previous gradient has zero B0-norm");
    axpy(h.gbg(k) / gbg_prev_, p_, p);
  }
  p_ = std::move(p);
  gbg_prev_ = h.gbg(k);
  k_ = k;
  started_ = true;
  return p_;
}

template <class T>
BroydenUpdateTerms<T> broyden_update_terms(const IterHistory<T>& h, std::size_t i, double phi) {
  const T& gp = h.gp(i);
  const Vector<T> y = h.y(i);
  const T yp = dot(y, h.p(i));
  if (gp == T(0)) throw DegenerateHistory("g_iᵀp_i = 0");
  if (yp == T(0) || h.alpha(i) == T(0)) throw DegenerateHistory("α_i y_iᵀp_i = 0");
  BroydenUpdateTerms<T> t;
  t.eta = T(1) / gp;
  t.rho = T(1) / (h.alpha(i) * yp);
  t.phi = phi;
  t.g = h.g(i);
  t.y = y;
  if (phi != 0.0) {
    if (gp > T(0)) throw Breakdown("broyden: ascent direction in history");
    const T root = sqrt_checked(-gp);
    t.omega = scaled(root / yp, y);
    axpy(-root / gp, h.g(i), t.omega);
  } else {
    t.omega.assign(y.size(), T(0));
  }
  return t;
}

template <class T>
void apply_broyden_update(Matrix<T>& b, const BroydenUpdateTerms<T>& t) {
  add_sym_outer(b, t.eta, t.g);
  add_sym_outer(b, t.rho, t.y);
  if (t.phi != 0.0) add_sym_outer(b, T(t.phi), t.omega);
}

template <class T>
Matrix<T> broyden_matrix(const IterHistory<T>& h, std::size_t k) {
  Matrix<T> b = h.b0().dense(h.dimension());
  for (std::size_t i = 0; i < k; ++i) apply_broyden_update(b, broyden_update_terms(h, i, h.phi(i)));
  return b;
}

template <class T>
ElsScaling<T> broyden_els_scaling(const IterHistory<T>& h, double phi_prev, const Vector<T>& p_bfgs) {
  const std::size_t k = h.current();
  if (k == 0) return {p_bfgs, T(1), T(0)};
  const T& gp_prev = h.gp(k - 1);
  if (gp_prev == T(0)) throw Breakdown("els scaling: g_{k-1}ᵀp_{k-1} = 0");
  const T gpb = dot(h.g(k), p_bfgs);
  // B_k = B_k^BFGS − (φ_{k−1}/g_{k−1}ᵀp_{k−1}) g_kg_kᵀ, so by Sherman–Morrison on
  // B_k^BFGS p = −g_k the factor is 1 + (φ_{k−1}/g_{k−1}ᵀp_{k−1}) g_kᵀp_k^BFGS.
  const T denom = T(1) + T(phi_prev) / gp_prev * gpb;
  if (denom == T(0)) throw Breakdown("els scaling: zero denominator");
  ElsScaling<T> out;
  out.scale = T(1) / denom;
  out.p = scaled(out.scale, p_bfgs);
  const T gpk = dot(h.g(k), out.p);
  out.identity_residual = T(1) / gpk - T(phi_prev) / gp_prev - T(1) / gpb;
  return out;
}

template <class T>
SymmetricOperator<T> mup_operator(const IterHistory<T>& h, const std::vector<T>& rho, double phi_k) {
  const std::size_t k = h.current();
  if (rho.size() < k) throw InvalidInput("mup: need ρ_i for every i < k");
  SymmetricOperator<T> op(h.b0(), h.dimension());
  for (std::size_t i = 0; i < k; ++i) {
    op.add_term(T(-1) / h.gbg(i), h.g(i));
    op.add_term(rho[i], h.y(i));
  }
  if (phi_k != 0.0) op.add_term(T(phi_k), h.g(k));
  return op;
}

template <class T>
Vector<T> mup_direction(const IterHistory<T>& h, const std::vector<T>& rho, double phi_k, bool enforce_spd) {
  return dense_solve(mup_operator(h, rho, phi_k).dense(), negated(h.g(h.current())), enforce_spd);
}

std::vector<std::size_t> lc_active_set(std::size_t k, std::size_t m, MemoryPolicy policy) {
  std::vector<std::size_t> a;
  if (policy == MemoryPolicy::standard) {
    const std::size_t lo = k > m ? k - m : 0;
    for (std::size_t i = lo; i <= k; ++i) a.push_back(i);
  } else {
    const std::size_t lo = k + 1 > m ? k + 1 - m : 0;
    if (lo > 0) a.push_back(0);
    for (std::size_t i = lo; i <= k; ++i) a.push_back(i);
  }
  return a;
}

template <class T>
LcSystem<T> lc_system(const IterHistory<T>& h, const std::vector<std::size_t>& active, const std::vector<T>& rho,
                      double phi_k) {
  const std::size_t k = h.current();
  if (active.empty() || active.back() != k) throw InvalidInput("lc: active set must end with k");
  for (std::size_t i = 1; i < active.size(); ++i)
    if (active[i] <= active[i - 1]) throw InvalidInput("lc: active set must be strictly increasing");
  if (rho.size() < k) throw InvalidInput("lc: need ρ_i for every i < k");

  SymmetricOperator<T> op(h.b0(), h.dimension());
  for (std::size_t i = 0; i + 1 < active.size(); ++i) {
    const std::size_t j = active[i];
    const std::size_t jn = active[i + 1];
    op.add_term(T(1) / h.gp(j) + T(h.phi(j)), h.g(j));
    op.add_term(rho[j], sub(h.g(jn), h.g(j)));
  }
  if (phi_k != 0.0) op.add_term(T(phi_k), h.g(k));

  // −N_k g_k = −g_k + (g_kᵀB0⁻¹g_k / (1 + φ_k g_kᵀB0⁻¹g_k)) Σ_{i∈I} (1/g_iᵀp_i + φ_i) g_i
  Vector<T> rhs = negated(h.g(k));
  const T denom = T(1) + T(phi_k) * h.gbg(k);
  if (denom == T(0)) throw Breakdown("lc: 1 + φ_k g_kᵀB0⁻¹g_k = 0");
  const T factor = h.gbg(k) / denom;
  std::size_t next_active = 0;
  for (std::size_t i = 0; i < k; ++i) {
    while (next_active < active.size() && active[next_active] < i) ++next_active;
    if (next_active < active.size() && active[next_active] == i) continue;
    axpy(factor * (T(1) / h.gp(i) + T(h.phi(i))), h.g(i), rhs);
  }
  return {std::move(op), std::move(rhs)};
}

template <class T>
Vector<T> lc_direction(const IterHistory<T>& h, const std::vector<std::size_t>& active, const std::vector<T>& rho,
                       double phi_k, bool enforce_spd) {
  LcSystem<T> sys = lc_system(h, active, rho, phi_k);
  return dense_solve(sys.b.dense(), sys.rhs, enforce_spd);
}

std::vector<std::size_t> sympcgs_active_set(std::size_t k, std::size_t m, MemoryPolicy policy) {
  std::vector<std::size_t> a;
  if (k == 0) return a;
  const std::size_t lo = k > m - 1 ? k - (m - 1) : 0;
  if (policy == MemoryPolicy::keep_first && lo > 0) a.push_back(0);
  for (std::size_t i = lo; i < k; ++i) a.push_back(i);
  return a;
}

template <class T>
SymmetricOperator<T> sympcgs_operator(const IterHistory<T>& h, const std::vector<std::size_t>& active,
                                      const std::vector<T>& rho, double phi_k) {
  const std::size_t k = h.current();
  SymmetricOperator<T> op(h.b0(), h.dimension());
  if (k >= 1) {
    if (h.gp(k - 1) == T(0)) throw Breakdown("sympcgs: g_{k-1}ᵀp_{k-1} = 0");
    op.set_c_correction(h.p(k - 1), h.g(k), h.gp(k - 1));
  }
  for (std::size_t i : active) {
    if (i >= k) throw InvalidInput("sympcgs: stabilizer index must be below k");
    op.add_term(rho.at(i), h.y(i));
  }
  if (phi_k != 0.0) op.add_term(T(phi_k), h.g(k));
  return op;
}

template <class T>
Vector<T> sympcgs_direction(const IterHistory<T>& h, const std::vector<std::size_t>& active,
                            const std::vector<T>& rho, double phi_k, bool enforce_spd) {
  return dense_solve(sympcgs_operator(h, active, rho, phi_k).dense(), negated(h.g(h.current())), enforce_spd);
}

std::vector<std::size_t> lbfgs_pairs(std::size_t k, std::size_t m, MemoryPolicy policy) {
  std::vector<std::size_t> a;
  if (k == 0) return a;
  if (policy == MemoryPolicy::standard) {
    const std::size_t lo = k > m ? k - m : 0;
    for (std::size_t i = lo; i < k; ++i) a.push_back(i);
  } else {
    const std::size_t lo = k > m - 1 ? k - (m - 1) : 0;
    if (lo > 0) a.push_back(0);
    for (std::size_t i = lo; i < k; ++i) a.push_back(i);
  }
  return a;
}

template <class T>
Vector<T> lbfgs_direction(const IterHistory<T>& h, std::size_t m, MemoryPolicy policy) {
  const std::size_t k = h.current();
  const std::vector<std::size_t> pairs = lbfgs_pairs(k, m, policy);
  std::vector<Vector<T>> s, y;
  std::vector<T> rho;
  for (std::size_t i : pairs) {
    s.push_back(h.s(i));
    y.push_back(h.y(i));
    const T ys = dot(y.back(), s.back());
    if (!(ys > T(0))) throw Breakdown("lbfgs: stored pair with yᵀs <= 0");
    rho.push_back(T(1) / ys);
  }
  Vector<T> q = h.g(k);
  std::vector<T> a(pairs.size());
  for (std::size_t j = pairs.size(); j-- > 0;) {
    a[j] = rho[j] * dot(s[j], q);
    axpy(-a[j], y[j], q);
  }
  Vector<T> r = h.b0().solve(q);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const T b = rho[j] * dot(y[j], r);
    axpy(a[j] - b, s[j], r);
  }
  return negated(r);
}

template <class T>
std::vector<T> rho_values(const IterHistory<T>& h, const RhoSchedule& schedule) {
  const std::size_t k = h.current();
  const std::vector<double> xi = schedule.multipliers(k, k);
  std::vector<T> rho;
  rho.reserve(k);
  for (std::size_t i = 0; i < k; ++i) rho.push_back(T(xi[i]) * h.rho_secant(i));
  return rho;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
class PcgStrategy final : public DirectionStrategy<T> {
 public:
  StepDirection<T> next(const IterHistory<T>& h) override { return {rec_.next(h), 0.0}; }

 private:
  PcgRecurrence<T> rec_;
};

template <class T>
class BroydenStrategy final : public DirectionStrategy<T> {
 public:
  BroydenStrategy(const StrategyConfig& cfg, bool bfgs) : cfg_(cfg), bfgs_(bfgs) {}

  StepDirection<T> next(const IterHistory<T>& h) override {
    const std::size_t k = h.current();
    if (k == 0) b_ = h.b0().dense(h.dimension());
    while (updated_ < k) {
      apply_broyden_update(b_, broyden_update_terms(h, updated_, h.phi(updated_)));
      ++updated_;
    }
    Vector<T> p = dense_solve(b_, negated(h.g(k)), cfg_.enforce_spd);
    const double phi = bfgs_ ? 0.0 : cfg_.phi.at(k, to_double(h.gbg(k)));
    return {std::move(p), phi};
  }

 private:
  StrategyConfig cfg_;
  bool bfgs_;
  Matrix<T> b_;
  std::size_t updated_ = 0;
};

/// Shared driver for the families whose system is a SymmetricOperator with a
/// right-hand side: MuP, LC and symPCGs.
template <class T>
class OperatorStrategy final : public DirectionStrategy<T> {
 public:
  explicit OperatorStrategy(const StrategyConfig& cfg) : cfg_(cfg) {}

  StepDirection<T> next(const IterHistory<T>& h) override {
    const std::size_t k = h.current();
    const double gbg = to_double(h.gbg(k));
    const double phi_k = k == 0 ? 0.0 : cfg_.phi.at(k, gbg);
    if (cfg_.enforce_spd && !(phi_k * gbg > -1.0)) throw NotSpd("φ_k <= −1/g_kᵀB0⁻¹g_k");
    const std::vector<T> rho = rho_values(h, cfg_.rho);

    std::optional<SymmetricOperator<T>> op;
    Vector<T> rhs;
    switch (cfg_.family) {
      case Family::mup:
        op.emplace(mup_operator(h, rho, phi_k));
        rhs = negated(h.g(k));
        break;
      case Family::lc: {
        LcSystem<T> sys = lc_system(h, lc_active_set(k, cfg_.memory, cfg_.policy), rho, phi_k);
        op.emplace(std::move(sys.b));
        rhs = std::move(sys.rhs);
        break;
      }
      default:
        op.emplace(sympcgs_operator(h, sympcgs_active_set(k, cfg_.memory, cfg_.policy), rho, phi_k));
        rhs = negated(h.g(k));
        break;
    }

    if (cfg_.solve == SolveMode::dense) {
      return {dense_solve(op->dense(), rhs, cfg_.enforce_spd), phi_k};
    }
    const SymmetricOperator<T>& ref = *op;
    auto apply = [&ref](const Vector<T>& v) { return ref.apply(v); };
    if (cfg_.basis.kind == BasisKind::gradient_span) {
      if (k == 0) span_ = SubspaceBasis<T>(h.dimension());
      span_.append(h.binv_g(k));
      return {reduced_direction<T>(span_, apply, rhs, cfg_.enforce_spd), phi_k};
    }
    return {reduced_direction<T>(build_basis(h, cfg_.basis), apply, rhs, cfg_.enforce_spd), phi_k};
  }

 private:
  StrategyConfig cfg_;
  SubspaceBasis<T> span_;
};

template <class T>
class LbfgsStrategy final : public DirectionStrategy<T> {
 public:
  explicit LbfgsStrategy(const StrategyConfig& cfg) : cfg_(cfg) {}
  StepDirection<T> next(const IterHistory<T>& h) override {
    return {lbfgs_direction(h, cfg_.memory, cfg_.policy), 0.0};
  }

 private:
  StrategyConfig cfg_;
};

}  // namespace

template <class T>
std::unique_ptr<DirectionStrategy<T>> make_strategy(const StrategyConfig& cfg, std::size_t n) {
  cfg.validate(n);
  switch (cfg.family) {
    case Family::pcg:
      return std::make_unique<PcgStrategy<T>>();
    case Family::broyden:
      return std::make_unique<BroydenStrategy<T>>(cfg, false);
    case Family::bfgs:
      return std::make_unique<BroydenStrategy<T>>(cfg, true);
    case Family::mup:
    case Family::lc:
    case Family::sympcgs:
      return std::make_unique<OperatorStrategy<T>>(cfg);
    case Family::lbfgs:
      return std::make_unique<LbfgsStrategy<T>>(cfg);
  }
  throw InvalidSpec("unknown family");
}

#define QNLAB_INSTANTIATE(T)                                                                                     \
  template Vector<T> dense_solve<T>(const Matrix<T>&, const Vector<T>&, bool);                                   \
  template Vector<T> pcg_direction<T>(const IterHistory<T>&);                                                    \
  template class PcgRecurrence<T>;                                                                               \
  template BroydenUpdateTerms<T> broyden_update_terms<T>(const IterHistory<T>&, std::size_t, double);            \
  template void apply_broyden_update<T>(Matrix<T>&, const BroydenUpdateTerms<T>&);                               \
  template Matrix<T> broyden_matrix<T>(const IterHistory<T>&, std::size_t);                                      \
  template ElsScaling<T> broyden_els_scaling<T>(const IterHistory<T>&, double, const Vector<T>&);                \
  template SymmetricOperator<T> mup_operator<T>(const IterHistory<T>&, const std::vector<T>&, double);           \
  template Vector<T> mup_direction<T>(const IterHistory<T>&, const std::vector<T>&, double, bool);               \
  template LcSystem<T> lc_system<T>(const IterHistory<T>&, const std::vector<std::size_t>&,                      \
                                    const std::vector<T>&, double);                                              \
  template Vector<T> lc_direction<T>(const IterHistory<T>&, const std::vector<std::size_t>&,                     \
                                     const std::vector<T>&, double, bool);                                       \
  template SymmetricOperator<T> sympcgs_operator<T>(const IterHistory<T>&, const std::vector<std::size_t>&,      \
                                                    const std::vector<T>&, double);                              \
  template Vector<T> sympcgs_direction<T>(const IterHistory<T>&, const std::vector<std::size_t>&,                \
                                          const std::vector<T>&, double, bool);                                  \
  template Vector<T> lbfgs_direction<T>(const IterHistory<T>&, std::size_t, MemoryPolicy);                      \
  template std::vector<T> rho_values<T>(const IterHistory<T>&, const RhoSchedule&);                              \
  template std::unique_ptr<DirectionStrategy<T>> make_strategy<T>(const StrategyConfig&, std::size_t);

QNLAB_INSTANTIATE(double)
QNLAB_INSTANTIATE(BigFloat)

#undef QNLAB_INSTANTIATE

}  // namespace qnlab
