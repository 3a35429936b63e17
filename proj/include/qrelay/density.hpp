#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "qrelay/common.hpp"
#include "qrelay/subsystem.hpp"

namespace qrelay {

// Density operator over a labeled tensor factorization. Immutable after
// construction; all invariants (Hermitian, unit trace, positivity, diagonal
// classical factors) are checked when the object is built.
class DensityOperator {
 public:
  DensityOperator(std::vector<SubsystemLabel> labels, Matrix matrix)
      : labels_(std::move(labels)), mat_(std::move(matrix)) {
    validate();
  }

  const std::vector<SubsystemLabel>& labels() const { return labels_; }
  const Matrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }

  bool has(std::string_view name) const { return find_label(labels_, name) >= 0; }

  const SubsystemLabel& label(std::string_view name) const {
    int i = find_label(labels_, name);
    if (i < 0) throw LabelError("no subsystem named '" + std::string(name) + "'");
    return labels_[i];
  }

  std::vector<long> dims() const { return label_dims(labels_); }

 private:
  void validate() const {
    check_labels(labels_, "DensityOperator");
    const long d = total_dim(labels_);
    check_dimension_cap(d, "DensityOperator");
    if (mat_.rows() != d || mat_.cols() != d) {
      throw DimensionError("DensityOperator: matrix is " + std::to_string(mat_.rows()) + "x" +
                           std::to_string(mat_.cols()) + " but labels give dim " +
                           std::to_string(d));
    }
    const double herm = max_abs(mat_ - mat_.adjoint());
    if (herm > kHermitianTol) {
      throw ValidationError("DensityOperator: not Hermitian, residual " + std::to_string(herm));
    }
    const double tr_err = std::abs(mat_.trace() - Complex(1.0, 0.0));
    if (tr_err > kTraceTol) {
      throw ValidationError("DensityOperator: trace deviates from 1 by " + std::to_string(tr_err));
    }
    check_positive();
    check_classical_diagonal();
  }

  // min eigenvalue >= -1e-9. A shifted Cholesky factorization decides the
  // common case; the exact spectrum is computed only when it fails.
  void check_positive() const {
    Matrix shifted = hermitize(mat_);
    shifted.diagonal().array() += Complex(kPositivityTol, 0.0);
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) return;
    const double min_eig = hermitian_eigenvalues(mat_).minCoeff();
    if (min_eig < -kPositivityTol) {
      throw ValidationError("DensityOperator: min eigenvalue " + std::to_string(min_eig) +
                            " below -1e-9");
    }
  }

  void check_classical_diagonal() const {
    std::vector<int> classical;
    for (size_t k = 0; k < labels_.size(); ++k) {
      if (labels_[k].kind == LabelKind::classical && labels_[k].dim > 1) {
        classical.push_back(static_cast<int>(k));
      }
    }
    if (classical.empty()) return;
    const auto dims = label_dims(labels_);
    std::vector<long> stride(dims.size(), 1);
    for (size_t k = dims.size(); k-- > 1;) stride[k - 1] = stride[k] * dims[k];
    const long d = mat_.rows();
    for (long r = 0; r < d; ++r) {
      for (long c = 0; c < d; ++c) {
        if (std::abs(mat_(r, c)) <= kClassicalDiagTol) continue;
        for (int k : classical) {
          if ((r / stride[k]) % dims[k] != (c / stride[k]) % dims[k]) {
            throw LabelError("DensityOperator: off-diagonal weight " +
                             std::to_string(std::abs(mat_(r, c))) + " on classical factor '" +
                             labels_[k].name + "'");
          }
        }
      }
    }
  }

  std::vector<SubsystemLabel> labels_;
  Matrix mat_;
};

// Kronecker product of states; label lists concatenate.
inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  std::vector<SubsystemLabel> labels = a.labels();
  for (const auto& l : b.labels()) {
    if (find_label(labels, l.name) >= 0) {
      throw LabelError("tensor: duplicate label '" + l.name + "'");
    }
    labels.push_back(l);
  }
  check_dimension_cap(a.dim() * b.dim(), "tensor");
  return DensityOperator(std::move(labels), kron(a.matrix(), b.matrix()));
}

// Reduced state on the named subsystems; the kept factors retain the order
// they have in rho.
inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<std::string>& keep) {
  const auto& labels = rho.labels();
  std::vector<char> keep_mask(labels.size(), 0);
  for (const auto& name : keep) {
    int i = find_label(labels, name);
    if (i < 0) throw LabelError("partial_trace: unknown label '" + name + "'");
    if (keep_mask[i]) throw LabelError("partial_trace: label '" + name + "' listed twice");
    keep_mask[i] = 1;
  }
  std::vector<int> perm;
  std::vector<SubsystemLabel> kept;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (keep_mask[i]) {
      perm.push_back(static_cast<int>(i));
      kept.push_back(labels[i]);
    }
  }
  long keep_dim = 1;
  for (const auto& l : kept) keep_dim *= l.dim;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!keep_mask[i]) perm.push_back(static_cast<int>(i));
  }
  const Matrix permuted = permute_factors(rho.matrix(), rho.dims(), perm);
  const long trace_dim = rho.dim() / keep_dim;
  Matrix out = Matrix::Zero(keep_dim, keep_dim);
  for (long r = 0; r < keep_dim; ++r) {
    for (long c = 0; c < keep_dim; ++c) {
      Complex sum(0.0, 0.0);
      for (long t = 0; t < trace_dim; ++t) {
        sum += permuted(r * trace_dim + t, c * trace_dim + t);
      }
      out(r, c) = sum;
    }
  }
  return DensityOperator(std::move(kept), std::move(out));
}

// Copy of rho with factors rearranged into the given label order.
inline DensityOperator aligned(const DensityOperator& rho, const std::vector<std::string>& order) {
  const auto& labels = rho.labels();
  if (order.size() != labels.size()) {
    throw LabelError("aligned: order must list every label exactly once");
  }
  std::vector<int> perm;
  std::vector<SubsystemLabel> new_labels;
  for (const auto& name : order) {
    int i = find_label(labels, name);
    if (i < 0) throw LabelError("aligned: unknown label '" + name + "'");
    perm.push_back(i);
    new_labels.push_back(labels[i]);
  }
  return DensityOperator(std::move(new_labels),
                         permute_factors(rho.matrix(), rho.dims(), perm));
}

// Classical probability vector embedded as a diagonal state on a
// classical-kind factor.
inline DensityOperator embed_classical(const std::vector<double>& dist, const std::string& name) {
  if (dist.empty()) throw DimensionError("embed_classical: empty distribution");
  double sum = 0.0;
  for (double p : dist) {
    if (p < -kPmfTol) {
      throw ValidationError("embed_classical: negative probability " + std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPmfTol) {
    throw ValidationError("embed_classical: probabilities sum to " + std::to_string(sum));
  }
  const long d = static_cast<long>(dist.size());
  Matrix m = Matrix::Zero(d, d);
  for (long i = 0; i < d; ++i) m(i, i) = Complex(std::max(dist[i], 0.0), 0.0);
  return DensityOperator({classical_label(name, d)}, std::move(m));
}

// |index><index| on a fresh label.
inline DensityOperator basis_state(const SubsystemLabel& label, long index) {
  if (index < 0 || index >= label.dim) {
    throw DimensionError("basis_state: index out of range");
  }
  Matrix m = Matrix::Zero(label.dim, label.dim);
  m(index, index) = Complex(1.0, 0.0);
  return DensityOperator({label}, std::move(m));
}

inline DensityOperator pure_state(std::vector<SubsystemLabel> labels, const CVector& amplitudes) {
  const long d = total_dim(labels);
  if (amplitudes.size() != d) {
    throw DimensionError("pure_state: amplitude vector length mismatch");
  }
  const double norm = amplitudes.norm();
  if (norm < 1e-12) throw ValidationError("pure_state: zero vector");
  CVector v = amplitudes / norm;
  return DensityOperator(std::move(labels), v * v.adjoint());
}

inline DensityOperator maximally_mixed(std::vector<SubsystemLabel> labels) {
  const long d = total_dim(labels);
  return DensityOperator(std::move(labels), Matrix::Identity(d, d) / static_cast<double>(d));
}

inline double purity(const DensityOperator& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

}  // namespace qrelay
