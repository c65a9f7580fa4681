#pragma once

// Search-direction rules for exact-linesearch methods on quadratics.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/history.hpp"
#include "qnlab/reduced.hpp"
#include "qnlab/symmetric_operator.hpp"

namespace qnlab {

enum class Family { pcg, broyden, bfgs, mup, lc, sympcgs, lbfgs };
enum class MemoryPolicy { standard, keep_first };
enum class SolveMode { dense, reduced };

std::string to_string(Family f);
Family parse_family(const std::string& s);

/// φ_k per iteration. `random_admissible` draws φ_k uniformly in
/// (lo_factor / g_kᵀB0⁻¹g_k, hi], seeded per k.
struct PhiSchedule {
  enum class Kind { constant, values, random_admissible };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::vector<double> values;  // φ_0, φ_1, …; zero past the end
  double lo_factor = -0.5;
  double hi = 2.0;
  std::uint64_t seed = 0;

  static PhiSchedule constant(double v) { return {Kind::constant, v, {}, -0.5, 2.0, 0}; }
  static PhiSchedule sequence(std::vector<double> v) { return {Kind::values, 0.0, std::move(v), -0.5, 2.0, 0}; }
  static PhiSchedule random_admissible(std::uint64_t seed, double lo_factor = -0.5, double hi = 2.0) {
    return {Kind::random_admissible, 0.0, {}, lo_factor, hi, seed};
  }

  double at(std::size_t k, double gbg) const;
};

/// ρ_i^{(k)} = ξ_i^{(k)} ρ^B_i with ξ ≡ 1 (secant) or ξ drawn fresh for each k.
/// The random law maps |z|, z standard normal, through its CDF onto a
/// log-uniform value in [lo, hi].
struct RhoSchedule {
  enum class Kind { secant, scaled_random };
  Kind kind = Kind::secant;
  double lo = 1e-1;
  double hi = 1e8;
  std::uint64_t seed = 0;

  static RhoSchedule secant() { return {}; }
  static RhoSchedule scaled_random(double lo, double hi, std::uint64_t seed) {
    return {Kind::scaled_random, lo, hi, seed};
  }

  /// ξ_0^{(k)}, …, ξ_{count−1}^{(k)}.
  std::vector<double> multipliers(std::size_t k, std::size_t count) const;
  std::string name() const;
  /// "secant" or "random:<lo>:<hi>".
  static RhoSchedule parse(const std::string& text, std::uint64_t seed);
};

struct StrategyConfig {
  static constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

  Family family = Family::pcg;
  std::optional<Matrix<double>> b0;  // identity when empty
  PhiSchedule phi;
  RhoSchedule rho;
  std::size_t memory = kUnlimited;
  MemoryPolicy policy = MemoryPolicy::standard;
  SolveMode solve = SolveMode::dense;
  BasisRule basis;
  bool enforce_spd = false;
  std::string label;

  /// Throws InvalidSpec for inconsistent settings.
  void validate(std::size_t n) const;
  /// The label, or a generated name such as "LC-0(m=3)".
  std::string name() const;
};

template <class T>
struct StepDirection {
  Vector<T> p;
  double phi = 0.0;  // φ the history records for this iteration
};

// ---------------------------------------------------------------------------
// Individual rules. Each acts on the latest index k = h.current().

/// p_k^PCG from the recorded p_{k−1}: −B0⁻¹g_k + (g_kᵀB0⁻¹g_k / g_{k−1}ᵀB0⁻¹g_{k−1}) p_{k−1}.
template <class T>
Vector<T> pcg_direction(const IterHistory<T>& h);

/// Maintains its own PCG chain over a gradient sequence, so a run of any
/// family can be compared to the PCG direction built from the same gradients.
template <class T>
class PcgRecurrence {
 public:
  /// Direction for the latest gradient of `h`; call once per index in order.
  const Vector<T>& next(const IterHistory<T>& h);
  const Vector<T>& last() const { return p_; }

 private:
  Vector<T> p_;
  T gbg_prev_ = T(0);
  std::size_t k_ = 0;
  bool started_ = false;
};

/// Rank-one pieces of the update B_i → B_{i+1}:
///   B_{i+1} = B_i + η g_i g_iᵀ + ρ y_i y_iᵀ + φ ω ωᵀ
/// with η = 1/g_iᵀp_i, ρ = 1/(α_i y_iᵀp_i), ω = (−g_iᵀp_i)^{1/2}(y_i/y_iᵀp_i − g_i/g_iᵀp_i).
template <class T>
struct BroydenUpdateTerms {
  T eta;
  T rho;
  double phi = 0.0;
  Vector<T> g;
  Vector<T> y;
  Vector<T> omega;
};

/// Throws DegenerateHistory when g_iᵀp_i = 0 or y_iᵀp_i = 0, and Breakdown
/// when g_iᵀp_i > 0 (ω is not real).
template <class T>
BroydenUpdateTerms<T> broyden_update_terms(const IterHistory<T>& h, std::size_t i, double phi);

template <class T>
void apply_broyden_update(Matrix<T>& b, const BroydenUpdateTerms<T>& terms);

/// B_k built by k recursive updates from B0 with φ_i = h.phi(i).
template <class T>
Matrix<T> broyden_matrix(const IterHistory<T>& h, std::size_t k);

/// p_k^BFGS / (1 + (φ_{k−1}/g_{k−1}ᵀp_{k−1}) g_kᵀp_k^BFGS) and the residual of
///   1/g_kᵀp_k − φ_{k−1}/g_{k−1}ᵀp_{k−1} − 1/g_kᵀp_k^BFGS.
template <class T>
struct ElsScaling {
  Vector<T> p;
  T scale;
  T identity_residual;
};

template <class T>
ElsScaling<T> broyden_els_scaling(const IterHistory<T>& h, double phi_prev, const Vector<T>& p_bfgs);

/// B0 + Σ_{i<k} [−g_i g_iᵀ/(g_iᵀB0⁻¹g_i) + ρ_i y_i y_iᵀ] + φ_k g_k g_kᵀ.
template <class T>
SymmetricOperator<T> mup_operator(const IterHistory<T>& h, const std::vector<T>& rho, double phi_k);

template <class T>
Vector<T> mup_direction(const IterHistory<T>& h, const std::vector<T>& rho, double phi_k, bool enforce_spd = false);

/// Active index set at k: standard {k−m, …, k}; keep-first {0} ∪ {k−m+1, …, k}.
std::vector<std::size_t> lc_active_set(std::size_t k, std::size_t m, MemoryPolicy policy);

/// The matrix over the active set and the right-hand side −N_k g_k.
template <class T>
struct LcSystem {
  SymmetricOperator<T> b;
  Vector<T> rhs;
};

/// `rho` is indexed by history index (ρ_i for the pair starting at j_i = i).
template <class T>
LcSystem<T> lc_system(const IterHistory<T>& h, const std::vector<std::size_t>& active, const std::vector<T>& rho,
                      double phi_k);

template <class T>
Vector<T> lc_direction(const IterHistory<T>& h, const std::vector<std::size_t>& active, const std::vector<T>& rho,
                       double phi_k, bool enforce_spd = false);

/// Stabilizer indices at k (subset of {0..k−1}): standard {k−m+1, …, k−1};
/// keep-first adds 0.
std::vector<std::size_t> sympcgs_active_set(std::size_t k, std::size_t m, MemoryPolicy policy);

/// C_kᵀB0C_k + Σ_{i∈A} ρ_i y_i y_iᵀ + φ_k g_k g_kᵀ with C_k = I − p_{k−1}g_kᵀ/g_{k−1}ᵀp_{k−1}.
template <class T>
SymmetricOperator<T> sympcgs_operator(const IterHistory<T>& h, const std::vector<std::size_t>& active,
                                      const std::vector<T>& rho, double phi_k);

template <class T>
Vector<T> sympcgs_direction(const IterHistory<T>& h, const std::vector<std::size_t>& active,
                            const std::vector<T>& rho, double phi_k, bool enforce_spd = false);

/// Pair indices kept at k: standard the m latest; keep-first pair 0 plus the m−1 latest.
std::vector<std::size_t> lbfgs_pairs(std::size_t k, std::size_t m, MemoryPolicy policy);

/// Two-loop recursion on −g_k with H0 = B0⁻¹. Throws Breakdown when a kept
/// pair has y_iᵀs_i ≤ 0.
template <class T>
Vector<T> lbfgs_direction(const IterHistory<T>& h, std::size_t m, MemoryPolicy policy);

/// Solves B p = rhs densely by symmetric indefinite factorization.
template <class T>
Vector<T> dense_solve(const Matrix<T>& b, const Vector<T>& rhs, bool enforce_spd);

// ---------------------------------------------------------------------------

template <class T>
class DirectionStrategy {
 public:
  virtual ~DirectionStrategy() = default;
  /// Direction for iteration k = h.current().
  virtual StepDirection<T> next(const IterHistory<T>& h) = 0;
};

/// A fresh strategy instance for one run.
template <class T>
std::unique_ptr<DirectionStrategy<T>> make_strategy(const StrategyConfig& cfg, std::size_t n);

/// ρ_i^{(k)} for i < k under the schedule (secant values times ξ).
template <class T>
std::vector<T> rho_values(const IterHistory<T>& h, const RhoSchedule& schedule);

}  // namespace qnlab
