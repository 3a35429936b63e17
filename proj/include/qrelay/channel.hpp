#pragma once

#include <string>
#include <vector>

#include "qrelay/common.hpp"
#include "qrelay/density.hpp"
#include "qrelay/subsystem.hpp"

namespace qrelay {

// CPTP map in Kraus form between labeled spaces. Completeness
// (sum K^dag K = 1) is validated on construction.
class QuantumChannel {
 public:
  QuantumChannel(std::vector<SubsystemLabel> in_labels, std::vector<SubsystemLabel> out_labels,
                 std::vector<Matrix> kraus)
      : in_(std::move(in_labels)), out_(std::move(out_labels)), kraus_(std::move(kraus)) {
    check_labels(in_, "QuantumChannel inputs");
    check_labels(out_, "QuantumChannel outputs");
    if (kraus_.empty()) throw ValidationError("QuantumChannel: no Kraus operators");
    const long din = in_dim();
    const long dout = out_dim();
    check_dimension_cap(std::max(din, dout), "QuantumChannel");
    for (const auto& k : kraus_) {
      if (k.rows() != dout || k.cols() != din) {
        throw DimensionError("QuantumChannel: Kraus operator is " + std::to_string(k.rows()) +
                             "x" + std::to_string(k.cols()) + ", expected " +
                             std::to_string(dout) + "x" + std::to_string(din));
      }
    }
    const double residual = completeness_residual();
    if (residual > kCompletenessTol) {
      throw ValidationError("QuantumChannel: completeness residual " + std::to_string(residual));
    }
  }

  const std::vector<SubsystemLabel>& in_labels() const { return in_; }
  const std::vector<SubsystemLabel>& out_labels() const { return out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  long in_dim() const { return total_dim(in_); }
  long out_dim() const { return total_dim(out_); }

  double completeness_residual() const {
    Matrix acc = Matrix::Zero(in_dim(), in_dim());
    for (const auto& k : kraus_) acc += k.adjoint() * k;
    return max_abs(acc - Matrix::Identity(in_dim(), in_dim()));
  }

 private:
  std::vector<SubsystemLabel> in_, out_;
  std::vector<Matrix> kraus_;
};

// Positive operator-valued measure on a single space.
class POVM {
 public:
  POVM(std::vector<Matrix> elements, std::vector<std::string> outcome_labels = {})
      : elements_(std::move(elements)), outcome_labels_(std::move(outcome_labels)) {
    if (elements_.empty()) throw ValidationError("POVM: no elements");
    const long d = elements_[0].rows();
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& e : elements_) {
      if (e.rows() != d || e.cols() != d) throw DimensionError("POVM: ragged element dims");
      if (hermitian_eigenvalues(e).minCoeff() < -kPositivityTol) {
        throw ValidationError("POVM: element not positive semidefinite");
      }
      acc += e;
    }
    const double res = max_abs(acc - Matrix::Identity(d, d));
    if (res > kCompletenessTol) {
      throw ValidationError("POVM: elements sum to identity with residual " + std::to_string(res));
    }
    if (outcome_labels_.empty()) {
      for (size_t i = 0; i < elements_.size(); ++i) outcome_labels_.push_back(std::to_string(i));
    }
    if (outcome_labels_.size() != elements_.size()) {
      throw ValidationError("POVM: outcome label count mismatch");
    }
  }

  const std::vector<Matrix>& elements() const { return elements_; }
  const std::vector<std::string>& outcome_labels() const { return outcome_labels_; }
  size_t size() const { return elements_.size(); }
  long dim() const { return elements_[0].rows(); }

 private:
  std::vector<Matrix> elements_;
  std::vector<std::string> outcome_labels_;
};

inline POVM computational_povm(long dim) {
  std::vector<Matrix> els;
  for (long i = 0; i < dim; ++i) {
    Matrix e = Matrix::Zero(dim, dim);
    e(i, i) = Complex(1.0, 0.0);
    els.push_back(std::move(e));
  }
  return POVM(std::move(els));
}

// Applies the channel to the named factors of rho (identity elsewhere). The
// consumed input labels are replaced by the channel's output labels; the
// untouched factors keep their relative order and come first.
inline DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& rho) {
  const auto& labels = rho.labels();
  std::vector<int> in_pos;
  for (const auto& want : ch.in_labels()) {
    int i = find_label(labels, want.name);
    if (i < 0) throw LabelError("apply_channel: state lacks input label '" + want.name + "'");
    if (labels[i].dim != want.dim) {
      throw DimensionError("apply_channel: label '" + want.name + "' has dim " +
                           std::to_string(labels[i].dim) + ", channel expects " +
                           std::to_string(want.dim));
    }
    in_pos.push_back(i);
  }
  std::vector<char> consumed(labels.size(), 0);
  for (int i : in_pos) {
    if (consumed[i]) throw LabelError("apply_channel: input label used twice");
    consumed[i] = 1;
  }
  std::vector<int> perm;
  std::vector<SubsystemLabel> rest;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!consumed[i]) {
      perm.push_back(static_cast<int>(i));
      rest.push_back(labels[i]);
    }
  }
  for (const auto& out : ch.out_labels()) {
    if (find_label(rest, out.name) >= 0) {
      throw LabelError("apply_channel: output label '" + out.name +
                       "' collides with a remaining factor");
    }
  }
  for (int i : in_pos) perm.push_back(i);

  const Matrix permuted = permute_factors(rho.matrix(), rho.dims(), perm);
  long rest_dim = 1;
  for (const auto& l : rest) rest_dim *= l.dim;
  const long din = ch.in_dim();
  const long dout = ch.out_dim();
  check_dimension_cap(rest_dim * dout, "apply_channel");

  Matrix out = Matrix::Zero(rest_dim * dout, rest_dim * dout);
  for (long r = 0; r < rest_dim; ++r) {
    for (long c = 0; c < rest_dim; ++c) {
      const Matrix block = permuted.block(r * din, c * din, din, din);
      Matrix ob = Matrix::Zero(dout, dout);
      for (const auto& k : ch.kraus()) ob += k * block * k.adjoint();
      out.block(r * dout, c * dout, dout, dout) = ob;
    }
  }
  const double tr_err = std::abs(out.trace() - Complex(1.0, 0.0));
  if (tr_err > kCompletenessTol) {
    throw ValidationError("apply_channel: output trace deviates by " + std::to_string(tr_err));
  }
  out /= out.trace().real();

  std::vector<SubsystemLabel> new_labels = rest;
  for (const auto& l : ch.out_labels()) new_labels.push_back(l);
  return DensityOperator(std::move(new_labels), std::move(out));
}

// Choi state: half of a maximally entangled state sent through the channel.
// Reference copies of the inputs are labeled ref_prefix + name.
inline DensityOperator choi_state(const QuantumChannel& ch, const std::string& ref_prefix = "R_") {
  const long din = ch.in_dim();
  const long dout = ch.out_dim();
  check_dimension_cap(din * dout, "choi_state");
  Matrix acc = Matrix::Zero(din * dout, din * dout);
  const double scale = 1.0 / std::sqrt(static_cast<double>(din));
  for (const auto& k : ch.kraus()) {
    CVector w(din * dout);
    for (long r = 0; r < din; ++r) {
      for (long o = 0; o < dout; ++o) w(r * dout + o) = scale * k(o, r);
    }
    acc += w * w.adjoint();
  }
  std::vector<SubsystemLabel> labels;
  for (const auto& l : ch.in_labels()) {
    labels.push_back(quantum_label(ref_prefix + l.name, l.dim));
  }
  for (const auto& l : ch.out_labels()) labels.push_back(l);
  return DensityOperator(std::move(labels), std::move(acc));
}

// after ∘ before; requires before's outputs to equal after's inputs
// (same names, dims, order).
inline QuantumChannel compose(const QuantumChannel& after, const QuantumChannel& before) {
  if (before.out_labels().size() != after.in_labels().size()) {
    throw LabelError("compose: label lists do not match");
  }
  for (size_t i = 0; i < after.in_labels().size(); ++i) {
    if (!(after.in_labels()[i] == before.out_labels()[i])) {
      throw LabelError("compose: intermediate labels do not match");
    }
  }
  std::vector<Matrix> kraus;
  for (const auto& k2 : after.kraus()) {
    for (const auto& k1 : before.kraus()) kraus.push_back(k2 * k1);
  }
  return QuantumChannel(before.in_labels(), after.out_labels(), std::move(kraus));
}

// Recovers a Kraus representation from a Choi state whose labels are
// [references..., outputs...] with references matching in_labels order.
inline QuantumChannel kraus_from_choi(const DensityOperator& choi,
                                      std::vector<SubsystemLabel> in_labels,
                                      std::vector<SubsystemLabel> out_labels) {
  const long din = total_dim(in_labels);
  const long dout = total_dim(out_labels);
  if (choi.dim() != din * dout) {
    throw DimensionError("kraus_from_choi: Choi dim does not match label dims");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(choi.matrix()));
  if (solver.info() != Eigen::Success) throw ValidationError("kraus_from_choi: eigensolver failed");
  std::vector<Matrix> kraus;
  for (long m = 0; m < solver.eigenvalues().size(); ++m) {
    const double mu = solver.eigenvalues()(m);
    if (mu < 1e-12) continue;
    const double scale = std::sqrt(static_cast<double>(din) * mu);
    Matrix k(dout, din);
    for (long r = 0; r < din; ++r) {
      for (long o = 0; o < dout; ++o) k(o, r) = scale * solver.eigenvectors()(r * dout + o, m);
    }
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(std::move(in_labels), std::move(out_labels), std::move(kraus));
}

// Destructive measurement of one factor, recording the outcome in a fresh
// classical register: rho -> sum_y tr_target[(Gamma_y) rho] ⊗ |y><y|.
inline QuantumChannel measurement_channel(const POVM& povm, const SubsystemLabel& target,
                                          const std::string& outcome_name) {
  if (povm.dim() != target.dim) {
    throw DimensionError("measurement_channel: POVM dim does not match target");
  }
  const long n = static_cast<long>(povm.size());
  std::vector<Matrix> kraus;
  for (long y = 0; y < n; ++y) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(povm.elements()[y]));
    for (long j = 0; j < solver.eigenvalues().size(); ++j) {
      const double g = solver.eigenvalues()(j);
      if (g < 1e-14) continue;
      Matrix k = Matrix::Zero(n, target.dim);
      k.row(y) = std::sqrt(g) * solver.eigenvectors().col(j).adjoint();
      kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel({target}, {classical_label(outcome_name, n)}, std::move(kraus));
}

// Classical stochastic map embedded as a Kraus set. rows[i][j] = p(j | i).
inline QuantumChannel stochastic_channel(const std::vector<std::vector<double>>& rows,
                                         const SubsystemLabel& in, const SubsystemLabel& out) {
  const long din = in.dim;
  const long dout = out.dim;
  if (static_cast<long>(rows.size()) != din) {
    throw DimensionError("stochastic_channel: row count mismatch");
  }
  std::vector<Matrix> kraus;
  for (long i = 0; i < din; ++i) {
    if (static_cast<long>(rows[i].size()) != dout) {
      throw DimensionError("stochastic_channel: column count mismatch");
    }
    double sum = 0.0;
    for (double p : rows[i]) sum += p;
    if (std::abs(sum - 1.0) > kPmfTol) {
      throw ValidationError("stochastic_channel: row sums to " + std::to_string(sum));
    }
    for (long j = 0; j < dout; ++j) {
      if (rows[i][j] < -kPmfTol) throw ValidationError("stochastic_channel: negative entry");
      if (rows[i][j] <= 0.0) continue;
      Matrix k = Matrix::Zero(dout, din);
      k(j, i) = Complex(std::sqrt(rows[i][j]), 0.0);
      kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel({in}, {out}, std::move(kraus));
}

inline QuantumChannel identity_channel(const std::vector<SubsystemLabel>& in,
                                       const std::vector<SubsystemLabel>& out) {
  if (total_dim(in) != total_dim(out)) {
    throw DimensionError("identity_channel: dimension mismatch");
  }
  const long d = total_dim(in);
  return QuantumChannel(in, out, {Matrix::Identity(d, d)});
}

}  // namespace qrelay
