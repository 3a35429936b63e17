#pragma once

// Shared test utilities: deterministic random objects and small classical
// oracles that are independent of the library's eigenvalue-based paths.

#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/common.hpp"
#include "qrelay/density.hpp"

namespace testutil {

using qrelay::Complex;
using qrelay::CVector;
using qrelay::Matrix;
using qrelay::SplitMix64;

inline Matrix random_ginibre(long rows, long cols, SplitMix64& rng) {
  Matrix g(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) g(r, c) = rng.complex_gaussian();
  }
  return g;
}

inline Matrix random_density_matrix(long dim, SplitMix64& rng) {
  Matrix g = random_ginibre(dim, dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return qrelay::hermitize(rho);
}

inline CVector random_pure_vector(long dim, SplitMix64& rng) {
  CVector v(dim);
  for (long i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
  v /= v.norm();
  return v;
}

inline Matrix random_unitary(long dim, SplitMix64& rng) {
  Matrix g = random_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= std::abs(d) > 1e-14 ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  return q;
}

// Random CPTP map via a Haar-ish Stinespring isometry with env_dim Kraus
// operators.
inline std::vector<Matrix> random_kraus(long din, long dout, long env_dim, SplitMix64& rng) {
  Matrix g = random_ginibre(dout * env_dim, din, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix v = Matrix(qr.householderQ()).leftCols(din);  // isometry: v^dag v = 1
  std::vector<Matrix> kraus;
  for (long e = 0; e < env_dim; ++e) {
    Matrix k(dout, din);
    for (long o = 0; o < dout; ++o) k.row(o) = v.row(o * env_dim + e);
    kraus.push_back(std::move(k));
  }
  return kraus;
}

inline qrelay::QuantumChannel random_channel(const std::vector<qrelay::SubsystemLabel>& in,
                                             const std::vector<qrelay::SubsystemLabel>& out,
                                             long env_dim, SplitMix64& rng) {
  return qrelay::QuantumChannel(in, out,
                                random_kraus(qrelay::total_dim(in), qrelay::total_dim(out),
                                             env_dim, rng));
}

// POVM from the columns of a random unitary (rank-one projectors).
inline qrelay::POVM random_projective_povm(long dim, SplitMix64& rng) {
  const Matrix u = random_unitary(dim, rng);
  std::vector<Matrix> els;
  for (long k = 0; k < dim; ++k) {
    els.push_back(u.col(k) * u.col(k).adjoint());
  }
  return qrelay::POVM(std::move(els));
}

// ---- classical oracles (independent of the Eigen-based entropy path) ----

inline double oracle_entropy(const std::vector<double>& p) {
  double H = 0.0;
  for (double v : p) {
    if (v > 1e-15) H -= v * std::log2(v);
  }
  return H;
}

// I(X;Y) from a joint pmf table p[x][y].
inline double oracle_mutual_information(const std::vector<std::vector<double>>& joint) {
  std::vector<double> px(joint.size(), 0.0);
  std::vector<double> py(joint[0].size(), 0.0);
  std::vector<double> flat;
  for (size_t x = 0; x < joint.size(); ++x) {
    for (size_t y = 0; y < joint[x].size(); ++y) {
      px[x] += joint[x][y];
      py[y] += joint[x][y];
      flat.push_back(joint[x][y]);
    }
  }
  return oracle_entropy(px) + oracle_entropy(py) - oracle_entropy(flat);
}

inline double oracle_binary_entropy(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

inline qrelay::DensityOperator bell_state(const std::string& a, const std::string& b) {
  CVector v = CVector::Zero(4);
  v(0) = 1.0 / std::sqrt(2.0);
  v(3) = 1.0 / std::sqrt(2.0);
  return qrelay::pure_state({qrelay::quantum_label(a, 2), qrelay::quantum_label(b, 2)}, v);
}

}  // namespace testutil
