#include "qnlab/qp.hpp"

#include "qnlab/random.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace qnlab {

namespace {

Vector<double> draw_spectrum(const SpectrumSpec& spec, SeededRng& rng) {
  const std::size_t n = spec.n;
  Vector<double> lam(n);
  if (n == 1) {
    lam[0] = 1.0;
    return lam;
  }
  lam[0] = 1.0;
  lam[n - 1] = spec.cond_target;
  const double lc = std::log(spec.cond_target);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double u = rng.uniform();
    lam[i] = spec.layout == EigenLayout::log_uniform ? std::exp(u * lc) : 1.0 + u * (spec.cond_target - 1.0);
  }
  std::sort(lam.begin(), lam.end());
  return lam;
}

}  // namespace

void SpectrumSpec::validate() const {
  if (n < 1) throw InvalidSpec("spectrum spec: n must be at least 1");
  if (!(cond_target >= 1.0) || !std::isfinite(cond_target)) {
    throw InvalidSpec("spectrum spec: cond_target must be >= 1");
  }
}

QuadraticProblem::QuadraticProblem(Matrix<double> h, Vector<double> c_vec, std::uint64_t seed_, double cond_)
    : n(h.rows()), H(std::move(h)), c(std::move(c_vec)), seed(seed_), cond(cond_) {
  check_same_size(H.rows(), H.cols(), "QuadraticProblem H");
  check_same_size(H.rows(), c.size(), "QuadraticProblem c");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (H(i, j) + H(j, i));
      H(i, j) = v;
      H(j, i) = v;
    }
}

Vector<double> spectrum_of(const SpectrumSpec& spec) {
  spec.validate();
  SeededRng rng(spec.seed);
  for (std::size_t i = 0; i < spec.n * spec.n; ++i) rng.normal();
  return draw_spectrum(spec, rng);
}

QuadraticProblem make_random_qp(const SpectrumSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  SeededRng rng(spec.seed);

  Matrix<double> g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.normal();
  const Vector<double> lam = draw_spectrum(spec, rng);
  Vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = rng.normal();

  const Matrix<double> q = householder_qr(g).first;

  // H = Q Λ Qᵀ, upper triangle computed then mirrored.
  Matrix<double> ql(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) ql(i, k) = q(i, k) * lam[k];
  Matrix<double> h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ql(i, k) * q(j, k);
      h(i, j) = s;
      h(j, i) = s;
    }
  }
  return QuadraticProblem(std::move(h), std::move(c), spec.seed, spec.cond_target);
}

Vector<double> gradient(const QuadraticProblem& p, const Vector<double>& x) { return gradient(p.H, p.c, x); }

Vector<double> exact_solution(const QuadraticProblem& p) { return exact_solution(p.H, p.c); }

double exact_steplength(const QuadraticProblem& p, const Vector<double>& g, const Vector<double>& d) {
  return exact_steplength(p.H, g, d);
}

void write_problem(std::ostream& os, const QuadraticProblem& p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p.cond);
  os << "qp " << p.n << ' ' << p.seed << ' ' << buf << '\n';
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", p.H(i, j));
      os << (j ? " " : "") << buf;
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.c[i]);
    os << (i ? " " : "") << buf;
  }
  os << '\n';
}

QuadraticProblem read_problem(std::istream& is) {
  std::string tag;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double cond = 0.0;
  if (!(is >> tag >> n >> seed >> cond) || tag != "qp") {
    throw InvalidInput("problem file: bad header");
  }
  Matrix<double> h(n, n);
  for (auto& v : h.data())
    if (!(is >> v)) throw InvalidInput("problem file: truncated H");
  Vector<double> c(n);
  for (auto& v : c)
    if (!(is >> v)) throw InvalidInput("problem file: truncated c");
  return QuadraticProblem(std::move(h), std::move(c), seed, cond);
}

void save_problem(const std::string& path, const QuadraticProblem& p) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path);
  write_problem(os, p);
}

QuadraticProblem load_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot read " + path);
  return read_problem(is);
}

}  // namespace qnlab
