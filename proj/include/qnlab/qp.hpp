#pragma once

// Strictly convex quadratic problems  min ½xᵀHx + cᵀx  with H ≻ 0.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "qnlab/linalg.hpp"

namespace qnlab {

enum class EigenLayout { log_uniform, linear };

struct SpectrumSpec {
  std::size_t n = 0;
  double cond_target = 1.0;
  std::uint64_t seed = 0;
  EigenLayout layout = EigenLayout::log_uniform;

  /// Throws InvalidSpec when n < 1 or cond_target < 1.
  void validate() const;
};

/// H and c are stored in double: generated instances are the ground truth and
/// high-precision runs lift them exactly.
struct QuadraticProblem {
  std::size_t n = 0;
  Matrix<double> H;
  Vector<double> c;
  std::uint64_t seed = 0;
  double cond = 1.0;

  QuadraticProblem() = default;
  /// Symmetrizes H as ½(H + Hᵀ) and checks dimensions.
  QuadraticProblem(Matrix<double> h, Vector<double> c_vec, std::uint64_t seed = 0, double cond = 1.0);

  template <class T>
  Matrix<T> hessian() const {
    return cast_matrix<T>(H);
  }
  template <class T>
  Vector<T> linear() const {
    return cast_vector<T>(c);
  }
};

/// Seeded random SPD instance H = QΛQᵀ. Q comes from the QR factorization of a
/// standard-normal matrix, Λ has λ_min = 1, λ_max = cond_target and interior
/// eigenvalues drawn per layout, and c is standard normal.
///
/// The generator is std::mt19937_64 seeded with spec.seed; draws are consumed
/// in the order: n² entries of the normal matrix (row-major), n−2 interior
/// eigenvalue uniforms, then n entries of c.
QuadraticProblem make_random_qp(const SpectrumSpec& spec);

/// The eigenvalues used by make_random_qp for this spec, ascending.
Vector<double> spectrum_of(const SpectrumSpec& spec);

template <class T>
Vector<T> gradient(const Matrix<T>& H, const Vector<T>& c, const Vector<T>& x) {
  check_same_size(H.cols(), x.size(), "gradient");
  return add(matvec(H, x), c);
}

Vector<double> gradient(const QuadraticProblem& p, const Vector<double>& x);

template <class T>
T objective(const Matrix<T>& H, const Vector<T>& c, const Vector<T>& x) {
  return dot(x, matvec(H, x)) / T(2) + dot(c, x);
}

/// x* solving Hx* + c = 0 by Cholesky. Throws NotSpd when H is not SPD.
template <class T>
Vector<T> exact_solution(const Matrix<T>& H, const Vector<T>& c) {
  return Cholesky<T>(H).solve(negated(c));
}

Vector<double> exact_solution(const QuadraticProblem& p);

/// α = −gᵀd / dᵀHd. Throws InvalidInput for d = 0 and NotSpd when dᵀHd ≤ 0.
template <class T>
T exact_steplength(const Matrix<T>& H, const Vector<T>& g, const Vector<T>& d) {
  check_same_size(g.size(), d.size(), "exact_steplength");
  bool nonzero = false;
  for (const auto& v : d) {
    if (!(v == T(0))) {
      nonzero = true;
      break;
    }
  }
  if (!nonzero) throw InvalidInput("exact_steplength: zero direction");
  const T curv = dot(d, matvec(H, d));
  if (!(curv > T(0))) throw NotSpd("exact_steplength: nonpositive curvature dᵀHd");
  return -dot(g, d) / curv;
}

double exact_steplength(const QuadraticProblem& p, const Vector<double>& g, const Vector<double>& d);

/// Text format: `qp <n> <seed> <cond>` then row-major H, then c, %.17g.
void write_problem(std::ostream& os, const QuadraticProblem& p);
QuadraticProblem read_problem(std::istream& is);
void save_problem(const std::string& path, const QuadraticProblem& p);
QuadraticProblem load_problem(const std::string& path);

}  // namespace qnlab
