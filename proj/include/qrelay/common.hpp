#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrelay {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Numerical tolerances used across the toolkit.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-9;
inline constexpr double kCompletenessTol = 1e-9;
inline constexpr double kClassicalDiagTol = 1e-10;
inline constexpr double kPmfTol = 1e-12;
inline constexpr double kEigenvalueCutoff = 1e-12;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Unknown / duplicate / misused subsystem labels.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Mismatched or over-cap dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Violated numerical invariants (non-Hermitian, non-CPTP, bad pmf, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Optimizer could not produce a feasible configuration.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// Composite dimensions are capped so every eigendecomposition stays desk
// scale. The cap applies to any constructed state or channel output.
inline long& total_dimension_cap() {
  static long cap = 4096;
  return cap;
}

inline void check_dimension_cap(long dim, const std::string& where) {
  if (dim > total_dimension_cap()) {
    throw DimensionError(where + ": composite dimension " + std::to_string(dim) +
                         " exceeds cap " + std::to_string(total_dimension_cap()));
  }
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Eigenvalues of the hermitized matrix, ascending.
inline RVector hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ValidationError("eigenvalue computation failed");
  }
  return solver.eigenvalues();
}

inline double trace_norm(const Matrix& m) {
  return hermitian_eigenvalues(m).cwiseAbs().sum();
}

// Trace distance (1/2)*||a-b||_1 of Hermitian matrices.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  return 0.5 * trace_norm(a - b);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Reorders the tensor factors of a square matrix. perm[k] gives the position
// in the old factor order of the factor placed at new position k. The first
// factor is the most significant index (Kronecker convention).
inline Matrix permute_factors(const Matrix& m, const std::vector<long>& dims,
                              const std::vector<int>& perm) {
  const size_t nf = dims.size();
  long total = 1;
  for (long d : dims) total *= d;
  if (m.rows() != total || m.cols() != total) {
    throw DimensionError("permute_factors: matrix size does not match factor dims");
  }
  if (perm.size() != nf) {
    throw DimensionError("permute_factors: permutation length mismatch");
  }
  std::vector<long> new_dims(nf);
  for (size_t k = 0; k < nf; ++k) new_dims[k] = dims[perm[k]];

  // old strides
  std::vector<long> stride(nf, 1);
  for (size_t k = nf; k-- > 1;) stride[k - 1] = stride[k] * dims[k];

  std::vector<long> old_of_new(total);
  std::vector<long> digit(nf, 0);
  for (long idx = 0; idx < total; ++idx) {
    long old_idx = 0;
    for (size_t k = 0; k < nf; ++k) old_idx += digit[k] * stride[perm[k]];
    old_of_new[idx] = old_idx;
    // increment mixed-radix counter over new_dims, least significant last
    for (size_t k = nf; k-- > 0;) {
      if (++digit[k] < new_dims[k]) break;
      digit[k] = 0;
    }
  }
  Matrix out(total, total);
  for (long r = 0; r < total; ++r) {
    for (long c = 0; c < total; ++c) {
      out(r, c) = m(old_of_new[r], old_of_new[c]);
    }
  }
  return out;
}

// Deterministic 64-bit generator (splitmix64). Used instead of the standard
// distributions so seeded runs are reproducible across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  Complex complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Complex(re, im);
  }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
  return g.next();
}

// Shannon entropy of a probability vector, base 2.
inline double shannon_entropy(const std::vector<double>& p) {
  double H = 0.0;
  for (double v : p) {
    if (v > kEigenvalueCutoff) H -= v * std::log2(v);
  }
  return H;
}

// Binary entropy in bits.
inline double binary_entropy(double t) {
  if (t < -1e-12 || t > 1.0 + 1e-12) {
    throw ValidationError("binary_entropy: argument outside [0,1]");
  }
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

// Binary convolution a*b = (1-a)b + a(1-b).
inline double binary_convolve(double a, double b) { return (1.0 - a) * b + a * (1.0 - b); }

}  // namespace qrelay
