#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/common.hpp"
#include "qrelay/density.hpp"

namespace qrelay {

// Enumeration caps keep every projector matrix and eigendecomposition below
// a second of work.
inline constexpr long kMaxSequenceEnumeration = 16384;  // |alphabet|^n
inline constexpr long kMaxBlockDim = 1024;              // output-space dim^n

// Empirical letter counts of a sequence.
struct TypeProfile {
  std::vector<long> counts;
  long n = 0;

  static TypeProfile of(const std::vector<int>& xn, size_t alphabet) {
    TypeProfile t;
    t.counts.assign(alphabet, 0);
    t.n = static_cast<long>(xn.size());
    for (int a : xn) {
      if (a < 0 || static_cast<size_t>(a) >= alphabet) {
        throw DimensionError("TypeProfile: letter out of range");
      }
      ++t.counts[a];
    }
    return t;
  }
};

// |p(a) - N(a)/n| <= delta p(a) for every letter.
inline bool type_is_typical(const TypeProfile& type, const std::vector<double>& p, double delta) {
  for (size_t a = 0; a < p.size(); ++a) {
    const double emp = static_cast<double>(type.counts[a]) / static_cast<double>(type.n);
    if (std::abs(p[a] - emp) > delta * p[a] + 1e-12) return false;
  }
  return true;
}

namespace detail {

inline void enumerate_sequences(size_t alphabet, int n, std::vector<int>& prefix,
                                const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(prefix.size()) == n) {
    visit(prefix);
    return;
  }
  for (size_t a = 0; a < alphabet; ++a) {
    prefix.push_back(static_cast<int>(a));
    enumerate_sequences(alphabet, n, prefix, visit);
    prefix.pop_back();
  }
}

}  // namespace detail

// Exact enumeration of the delta-typical set, grouped by type class:
// sequences appear in lexicographic order.
inline std::vector<std::vector<int>> typical_set(const std::vector<double>& p, int n,
                                                 double delta) {
  if (p.empty() || n < 1) throw DimensionError("typical_set: bad arguments");
  double total = std::pow(static_cast<double>(p.size()), n);
  if (total > static_cast<double>(kMaxSequenceEnumeration)) {
    throw DimensionError("typical_set: enumeration cap exceeded");
  }
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  detail::enumerate_sequences(p.size(), n, prefix, [&](const std::vector<int>& xn) {
    if (type_is_typical(TypeProfile::of(xn, p.size()), p, delta)) out.push_back(xn);
  });
  return out;
}

// Projector onto the span of delta-typical eigen-sequences of a state. The
// base ensemble is the spectrum {p, |x>} with |x> the columns of `basis`.
// The three typicality constants are verified on construction.
class TypicalProjector {
 public:
  TypicalProjector(std::vector<double> probs, Matrix basis, int n, double delta)
      : probs_(std::move(probs)), basis_(std::move(basis)), n_(n), delta_(delta) {
    const long d = static_cast<long>(probs_.size());
    if (basis_.rows() != d || basis_.cols() != d) {
      throw DimensionError("TypicalProjector: basis must be square over the alphabet");
    }
    if (max_abs(basis_ * basis_.adjoint() - Matrix::Identity(d, d)) > 1e-9) {
      throw ValidationError("TypicalProjector: basis is not unitary");
    }
    double dim_check = std::pow(static_cast<double>(d), n_);
    if (dim_check > static_cast<double>(kMaxBlockDim)) {
      throw DimensionError("TypicalProjector: block dimension cap exceeded");
    }
    const long block = static_cast<long>(std::llround(dim_check));
    typical_ = typical_set(probs_, n_, delta_);

    set_probability_ = 0.0;
    max_typical_prob_ = 0.0;
    for (const auto& xn : typical_) {
      double pr = 1.0;
      for (int a : xn) pr *= probs_[a];
      set_probability_ += pr;
      max_typical_prob_ = std::max(max_typical_prob_, pr);
    }
    const double H = shannon_entropy(probs_);
    double nu = 1.0;
    for (double v : probs_) {
      if (v > 0.0) nu = std::min(nu, v);
    }
    epsilon_delta_ = 2.0 * static_cast<double>(d) * std::exp(-n_ * nu * delta_ * delta_);
    count_bound_ = std::exp2(n_ * (1.0 + delta_) * H);
    power_bound_ = std::exp2(-n_ * (1.0 - delta_) * H);
    if (set_probability_ < 1.0 - epsilon_delta_ - 1e-12) {
      throw ValidationError("TypicalProjector: unit-probability property violated");
    }
    if (static_cast<double>(typical_.size()) > count_bound_ * (1.0 + 1e-12)) {
      throw ValidationError("TypicalProjector: dimension property violated");
    }
    if (max_typical_prob_ > power_bound_ * (1.0 + 1e-12)) {
      throw ValidationError("TypicalProjector: equipartition property violated");
    }

    // diagonal indicator in the eigenbasis, conjugated back
    RVector diag = RVector::Zero(block);
    std::vector<long> stride(n_, 1);
    for (int k = n_; k-- > 1;) stride[k - 1] = stride[k] * d;
    for (const auto& xn : typical_) {
      long idx = 0;
      for (int k = 0; k < n_; ++k) idx += xn[k] * stride[k];
      diag(idx) = 1.0;
    }
    if (max_abs(basis_ - Matrix::Identity(d, d)) < 1e-14) {
      projector_ = diag.cast<Complex>().asDiagonal();
    } else {
      Matrix w = Matrix::Identity(1, 1);
      for (int k = 0; k < n_; ++k) w = kron(w, basis_);
      projector_ = w * diag.cast<Complex>().asDiagonal() * w.adjoint();
    }
  }

  const Matrix& projector() const { return projector_; }
  const std::vector<std::vector<int>>& typical_sequences() const { return typical_; }
  long rank() const { return static_cast<long>(typical_.size()); }
  int block_length() const { return n_; }
  double delta() const { return delta_; }
  const std::vector<double>& probs() const { return probs_; }

  // verified constants
  double set_probability() const { return set_probability_; }    // tr(Pi rho^n)
  double epsilon_delta() const { return epsilon_delta_; }        // 2 d exp(-n nu delta^2)
  double count_bound() const { return count_bound_; }            // 2^{n(1+delta)H}
  double power_bound() const { return power_bound_; }            // 2^{-n(1-delta)H}
  double max_typical_probability() const { return max_typical_prob_; }

 private:
  std::vector<double> probs_;
  Matrix basis_;
  int n_;
  double delta_;
  std::vector<std::vector<int>> typical_;
  Matrix projector_;
  double set_probability_, epsilon_delta_, count_bound_, power_bound_, max_typical_prob_;
};

// Spectral decompositions of the per-letter output states.
struct LetterSpectra {
  std::vector<std::vector<double>> probs;  // eigenvalues per letter
  std::vector<Matrix> bases;               // eigenvectors per letter

  static LetterSpectra of(const std::vector<Matrix>& states) {
    LetterSpectra out;
    for (const auto& s : states) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(s));
      std::vector<double> p(es.eigenvalues().size());
      for (long i = 0; i < es.eigenvalues().size(); ++i) p[i] = std::max(0.0, es.eigenvalues()(i));
      out.probs.push_back(std::move(p));
      out.bases.push_back(es.eigenvectors());
    }
    return out;
  }
};

// Conditional typical projector for a fixed sequence x^n: on the positions
// carrying letter a, the delta-typical projector of rho_a is applied. The
// result is diagonal in the product of per-letter eigenbases.
inline Matrix conditional_typical_projector(const LetterSpectra& spectra,
                                            const std::vector<int>& xn, double delta) {
  const int n = static_cast<int>(xn.size());
  const long d = spectra.bases[0].rows();
  double dim_check = std::pow(static_cast<double>(d), n);
  if (dim_check > static_cast<double>(kMaxBlockDim)) {
    throw DimensionError("conditional_typical_projector: block dimension cap exceeded");
  }
  const long block = static_cast<long>(std::llround(dim_check));

  std::vector<std::vector<long>> positions(spectra.probs.size());
  for (int i = 0; i < n; ++i) positions[xn[i]].push_back(i);

  RVector diag = RVector::Zero(block);
  std::vector<int> digits(n, 0);
  for (long idx = 0; idx < block; ++idx) {
    bool ok = true;
    for (size_t a = 0; a < positions.size() && ok; ++a) {
      if (positions[a].empty()) continue;
      TypeProfile t;
      t.counts.assign(d, 0);
      t.n = static_cast<long>(positions[a].size());
      for (long i : positions[a]) ++t.counts[digits[i]];
      ok = type_is_typical(t, spectra.probs[a], delta);
    }
    if (ok) diag(idx) = 1.0;
    for (int k = n; k-- > 0;) {
      if (++digits[k] < d) break;
      digits[k] = 0;
    }
  }
  Matrix w = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) w = kron(w, spectra.bases[xn[i]]);
  return w * diag.cast<Complex>().asDiagonal() * w.adjoint();
}

// A sampled classical codebook with its induced output states.
struct CodebookInstance {
  double rate = 0.0;
  int n = 0;
  std::vector<std::vector<int>> codewords;
  std::vector<Matrix> output_states;
  std::optional<POVM> decoder;  // last element is the complement
};

// Square-root measurement decoder: Lambda_m = S^{-1/2} Pi Pi_m Pi S^{-1/2}
// with S the sum over codewords, pseudo-inverted on its support. The
// complement element completes the POVM.
inline POVM build_sqrt_measurement(const CodebookInstance& cb, const Matrix& code_proj,
                                   const std::vector<Matrix>& word_projs) {
  if (word_projs.size() != cb.codewords.size()) {
    throw DimensionError("build_sqrt_measurement: one projector per codeword required");
  }
  const long d = code_proj.rows();
  std::vector<Matrix> upsilon;
  Matrix s = Matrix::Zero(d, d);
  for (const auto& pm : word_projs) {
    Matrix u = code_proj * pm * code_proj;
    s += u;
    upsilon.push_back(std::move(u));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(s));
  const double lam_max = es.eigenvalues().maxCoeff();
  if (lam_max < 1e-12) {
    throw ValidationError("build_sqrt_measurement: degenerate codebook (S vanishes)");
  }
  Matrix sinv = Matrix::Zero(d, d);
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 1e-12 * lam_max) {
      sinv += (1.0 / std::sqrt(lam)) * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
  }
  std::vector<Matrix> elements;
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& u : upsilon) {
    Matrix lam = hermitize(sinv * u * sinv);
    acc += lam;
    elements.push_back(std::move(lam));
  }
  elements.push_back(hermitize(Matrix::Identity(d, d) - acc));
  std::vector<std::string> names;
  for (size_t m = 0; m < upsilon.size(); ++m) names.push_back(std::to_string(m));
  names.push_back("fail");
  return POVM(std::move(elements), std::move(names));
}

// Exact average success probability of a decoder on its codebook.
inline double average_success(const CodebookInstance& cb, const POVM& decoder) {
  double acc = 0.0;
  for (size_t m = 0; m < cb.output_states.size(); ++m) {
    acc += (decoder.elements()[m] * cb.output_states[m]).trace().real();
  }
  return acc / static_cast<double>(cb.output_states.size());
}

struct SimulationRecord {
  int n = 0;
  double rate = 0.0;
  long codebook_size = 0;
  double eps = 0.0;      // measured shortfall of the projector conditions
  double h_const = 0.0;  // max log2 tr(Pi_x)
  double cap_h = 0.0;    // -log2 ||Pi rho Pi||
  double bound = 0.0;    // 2(eps + 2 sqrt(eps)) + 4 M 2^{-(H-h)}
  std::vector<double> errors;
  double mean_error = 0.0;
};

// Samples random codebooks from the typicality-restricted product
// distribution, builds the square-root decoder with typical projectors, and
// computes the exact average error per codebook. The packing bound is
// evaluated with constants measured from the constructed projectors; at desk
// scale it is often vacuous, and it is reported regardless.
inline SimulationRecord simulate_direct_code(const std::vector<Matrix>& letter_states,
                                             const std::vector<double>& p_x, double rate, int n,
                                             double delta, int trials, uint64_t seed) {
  if (letter_states.size() != p_x.size() || letter_states.empty()) {
    throw DimensionError("simulate_direct_code: one output state per letter required");
  }
  const long d = letter_states[0].rows();
  double block_check = std::pow(static_cast<double>(d), n);
  if (block_check > static_cast<double>(kMaxBlockDim)) {
    throw DimensionError("simulate_direct_code: output block dimension cap exceeded");
  }
  SimulationRecord rec;
  rec.n = n;
  rec.rate = rate;
  rec.codebook_size = static_cast<long>(std::ceil(std::exp2(n * rate) - 1e-9));
  if (rec.codebook_size < 1) rec.codebook_size = 1;

  const auto typ = typical_set(p_x, n, delta);
  if (typ.empty()) {
    throw ValidationError("simulate_direct_code: typical set is empty at this (n, delta)");
  }
  // restricted product distribution over the typical set
  std::vector<double> weights;
  double z = 0.0;
  for (const auto& xn : typ) {
    double pr = 1.0;
    for (int a : xn) pr *= p_x[a];
    weights.push_back(pr);
    z += pr;
  }
  std::vector<double> cumulative;
  double acc = 0.0;
  for (double w : weights) {
    acc += w / z;
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;

  // average output state and its typical projector
  Matrix omega = Matrix::Zero(d, d);
  for (size_t a = 0; a < letter_states.size(); ++a) omega += p_x[a] * letter_states[a];
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(omega));
  std::vector<double> spectrum(es.eigenvalues().size());
  for (long i = 0; i < es.eigenvalues().size(); ++i) spectrum[i] = std::max(0.0, es.eigenvalues()(i));
  TypicalProjector code_proj(spectrum, es.eigenvectors(), n, delta);
  if (code_proj.rank() == 0) {
    throw ValidationError(
        "simulate_direct_code: the output typical projector is empty at this (n, delta); "
        "increase delta for short blocks");
  }
  const Matrix& pi = code_proj.projector();

  const LetterSpectra spectra = LetterSpectra::of(letter_states);
  auto word_state = [&](const std::vector<int>& xn) {
    Matrix out = Matrix::Identity(1, 1);
    for (int a : xn) out = kron(out, letter_states[a]);
    return out;
  };

  // measured Lemma constants over the sampling support
  const long block = pi.rows();
  Matrix rho_bar = Matrix::Zero(block, block);
  rec.eps = 0.0;
  rec.h_const = 0.0;
  for (size_t t = 0; t < typ.size(); ++t) {
    const Matrix rho = word_state(typ[t]);
    const Matrix proj = conditional_typical_projector(spectra, typ[t], delta);
    const double tr_code = (pi * rho).trace().real();
    const double tr_word = (proj * rho).trace().real();
    rec.eps = std::max(rec.eps, std::max(1.0 - tr_code, 1.0 - tr_word));
    const double r = proj.trace().real();
    if (r >= 0.5) rec.h_const = std::max(rec.h_const, std::log2(r));
    else rec.eps = 1.0;  // empty codeword projector
    rho_bar += (weights[t] / z) * rho;
  }
  const double top = hermitian_eigenvalues(pi * rho_bar * pi).maxCoeff();
  rec.cap_h = top > 1e-300 ? -std::log2(top) : 1000.0;
  rec.eps = std::min(1.0, std::max(0.0, rec.eps));
  rec.bound = 2.0 * (rec.eps + 2.0 * std::sqrt(rec.eps)) +
              4.0 * static_cast<double>(rec.codebook_size) *
                  std::exp2(-(rec.cap_h - rec.h_const));

  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(t)));
    CodebookInstance cb;
    cb.rate = rate;
    cb.n = n;
    std::vector<Matrix> word_projs;
    for (long m = 0; m < rec.codebook_size; ++m) {
      const double u = rng.uniform();
      size_t pick = 0;
      while (pick + 1 < cumulative.size() && cumulative[pick] <= u) ++pick;
      cb.codewords.push_back(typ[pick]);
      cb.output_states.push_back(word_state(typ[pick]));
      word_projs.push_back(conditional_typical_projector(spectra, typ[pick], delta));
    }
    const POVM decoder = build_sqrt_measurement(cb, pi, word_projs);
    rec.errors.push_back(1.0 - average_success(cb, decoder));
  }
  double mean = 0.0;
  for (double e : rec.errors) mean += e;
  rec.mean_error = rec.errors.empty() ? 0.0 : mean / static_cast<double>(rec.errors.size());
  return rec;
}

struct GentleResult {
  double success_prob = 0.0;
  double trace_distance = 0.0;  // ||rho - rho_tilde||_1
  double bound = 0.0;           // 2 sqrt(delta)
  bool holds = false;
};

// Gentle measurement check: for 0 <= Lambda <= 1 with tr(Lambda rho) = 1 -
// delta, the renormalized post-measurement state stays within 2 sqrt(delta)
// of rho in trace norm.
inline GentleResult gentle_measurement_check(const DensityOperator& rho, const Matrix& lambda) {
  if (lambda.rows() != rho.dim() || lambda.cols() != rho.dim()) {
    throw DimensionError("gentle_measurement_check: operator dim mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(lambda));
  if (es.eigenvalues().minCoeff() < -kPositivityTol ||
      es.eigenvalues().maxCoeff() > 1.0 + kPositivityTol) {
    throw ValidationError("gentle_measurement_check: operator outside [0, 1]");
  }
  GentleResult out;
  out.success_prob = (lambda * rho.matrix()).trace().real();
  if (out.success_prob < 1e-12) {
    throw ValidationError("gentle_measurement_check: vanishing success probability");
  }
  const double delta = std::min(1.0, std::max(0.0, 1.0 - out.success_prob));
  out.bound = 2.0 * std::sqrt(delta);
  Matrix sqrt_lambda = Matrix::Zero(lambda.rows(), lambda.cols());
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = std::max(0.0, es.eigenvalues()(i));
    sqrt_lambda += std::sqrt(v) * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  }
  const Matrix post = (sqrt_lambda * rho.matrix() * sqrt_lambda) / out.success_prob;
  out.trace_distance = trace_norm(rho.matrix() - post);
  out.holds = out.trace_distance <= out.bound + 1e-9;
  return out;
}

}  // namespace qrelay
