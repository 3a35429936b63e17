#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/common.hpp"
#include "qrelay/density.hpp"
#include "qrelay/entropy.hpp"

namespace qrelay {

inline constexpr double kDegradedResidualTol = 1e-6;
inline constexpr double kOrcDistanceTol = 1e-8;

// Cached structure classification.
struct StructureTags {
  std::optional<bool> degraded;
  double degraded_residual = std::nan("");
  std::optional<bool> orc;
  double orc_distance = std::nan("");
  bool hadamard = false;
  bool classical_quantum = false;
};

// A relay channel N_{AD -> B...E}: one relay input D, one relay output E,
// everything else belongs to the sender (A) and the destination (B). An
// optional (B1, B2) split records orthogonal receiver components.
class RelayChannel {
 public:
  RelayChannel(QuantumChannel channel, std::string relay_in, std::string relay_out,
               std::vector<std::string> b1 = {}, std::vector<std::string> b2 = {})
      : channel_(std::move(channel)),
        relay_in_(std::move(relay_in)),
        relay_out_(std::move(relay_out)),
        b1_(std::move(b1)),
        b2_(std::move(b2)) {
    if (find_label(channel_.in_labels(), relay_in_) < 0) {
      throw LabelError("RelayChannel: relay input '" + relay_in_ + "' not among channel inputs");
    }
    if (find_label(channel_.out_labels(), relay_out_) < 0) {
      throw LabelError("RelayChannel: relay output '" + relay_out_ + "' not among channel outputs");
    }
    if (b1_.empty() != b2_.empty()) {
      throw LabelError("RelayChannel: B1/B2 split must name both sides");
    }
    if (!b1_.empty()) {
      std::vector<std::string> combined = b1_;
      combined.insert(combined.end(), b2_.begin(), b2_.end());
      auto dest = dest_names();
      if (combined.size() != dest.size()) {
        throw LabelError("RelayChannel: B1/B2 split does not partition the destination outputs");
      }
      for (const auto& name : combined) {
        bool found = false;
        for (const auto& d : dest) found = found || d == name;
        if (!found) {
          throw LabelError("RelayChannel: split label '" + name + "' is not a destination output");
        }
      }
    }
    bool all_classical = true;
    for (const auto& l : channel_.in_labels()) {
      all_classical = all_classical && l.kind == LabelKind::classical;
    }
    tags.classical_quantum = all_classical;
  }

  const QuantumChannel& channel() const { return channel_; }
  const std::string& relay_in() const { return relay_in_; }
  const std::string& relay_out() const { return relay_out_; }
  bool has_split() const { return !b1_.empty(); }
  const std::vector<std::string>& b1_names() const { return b1_; }
  const std::vector<std::string>& b2_names() const { return b2_; }

  std::vector<SubsystemLabel> sender_labels() const {
    std::vector<SubsystemLabel> out;
    for (const auto& l : channel_.in_labels()) {
      if (l.name != relay_in_) out.push_back(l);
    }
    return out;
  }

  SubsystemLabel relay_in_label() const {
    return channel_.in_labels()[find_label(channel_.in_labels(), relay_in_)];
  }

  SubsystemLabel relay_out_label() const {
    return channel_.out_labels()[find_label(channel_.out_labels(), relay_out_)];
  }

  std::vector<std::string> sender_names() const {
    std::vector<std::string> out;
    for (const auto& l : sender_labels()) out.push_back(l.name);
    return out;
  }

  std::vector<std::string> dest_names() const {
    std::vector<std::string> out;
    for (const auto& l : channel_.out_labels()) {
      if (l.name != relay_out_) out.push_back(l.name);
    }
    return out;
  }

  StructureTags tags;

 private:
  QuantumChannel channel_;
  std::string relay_in_, relay_out_;
  std::vector<std::string> b1_, b2_;
};

namespace paulis {
inline Matrix I() { return Matrix::Identity(2, 2); }
inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix Y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace paulis

// Depolarizing relay channel: a Pauli-twirled broadcast M_{A -> B1 E} that
// correlates B1 with E through theta0 = (1-p)|0><0| + p|1><1|, in product
// with a depolarizing direct link P_{D -> B2} of strength q.
inline RelayChannel make_depolarizing_relay(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0) {
    throw ValidationError("make_depolarizing_relay: parameters must lie in [0,1]");
  }
  const std::vector<Matrix> sigma = {paulis::I(), paulis::X(), paulis::Y(), paulis::Z()};
  // M(rho) = (1/4) sum_P (P ⊗ P)(rho ⊗ theta0)(P ⊗ P), outputs (B1, E)
  std::vector<Matrix> m_kraus;
  const double eig[2] = {1.0 - p, p};
  for (const auto& P : sigma) {
    for (int j = 0; j < 2; ++j) {
      if (eig[j] <= 0.0) continue;
      Matrix inject = Matrix::Zero(4, 2);  // rho -> rho ⊗ |j><j| component
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) inject(r * 2 + j, c) = (r == c) ? 1.0 : 0.0;
      }
      m_kraus.push_back(0.5 * std::sqrt(eig[j]) * kron(P, P) * inject);
    }
  }
  // P(rho) = (1-q) rho + q I/2 via Pauli Kraus set
  std::vector<Matrix> p_kraus;
  const double w0 = 1.0 - 0.75 * q;
  if (w0 > 0.0) p_kraus.push_back(std::sqrt(w0) * paulis::I());
  if (q > 0.0) {
    p_kraus.push_back(std::sqrt(q / 4.0) * paulis::X());
    p_kraus.push_back(std::sqrt(q / 4.0) * paulis::Y());
    p_kraus.push_back(std::sqrt(q / 4.0) * paulis::Z());
  }
  std::vector<Matrix> kraus;
  for (const auto& km : m_kraus) {
    for (const auto& kp : p_kraus) kraus.push_back(kron(km, kp));
  }
  QuantumChannel ch({quantum_label("A", 2), quantum_label("D", 2)},
                    {quantum_label("B1", 2), quantum_label("E", 2), quantum_label("B2", 2)},
                    std::move(kraus));
  RelayChannel relay(std::move(ch), "D", "E", {"B1"}, {"B2"});
  relay.tags.orc = true;
  return relay;
}

// Noiseless wired network: A1 -> B1 and D -> B2 are qubit pipes, A0 -> E is a
// three-qubit pipe to the relay.
inline RelayChannel make_wired_relay() {
  // inputs (A0:8, A1:2, D:2), outputs (B1:2, B2:2, E:8); B1=A1, B2=D, E=A0
  Matrix k = Matrix::Zero(32, 32);
  for (long a0 = 0; a0 < 8; ++a0) {
    for (long a1 = 0; a1 < 2; ++a1) {
      for (long d = 0; d < 2; ++d) {
        const long in_idx = a0 * 4 + a1 * 2 + d;
        const long out_idx = (a1 * 2 + d) * 8 + a0;
        k(out_idx, in_idx) = 1.0;
      }
    }
  }
  QuantumChannel ch({quantum_label("A0", 8), quantum_label("A1", 2), quantum_label("D", 2)},
                    {quantum_label("B1", 2), quantum_label("B2", 2), quantum_label("E", 8)},
                    {std::move(k)});
  RelayChannel relay(std::move(ch), "D", "E", {"B1"}, {"B2"});
  relay.tags.orc = true;
  return relay;
}

// Measure-and-prepare relay channel: a POVM on the joint input produces the
// classical relay observation Y1, from which the destination state is
// prepared.
struct HadamardSpec {
  std::vector<SubsystemLabel> in_labels;  // includes the relay input
  std::string relay_in;
  POVM measure;                            // on the joint input space
  std::vector<DensityOperator> prepare;    // one destination state per outcome
  std::string outcome_name = "Y1";
};

inline RelayChannel make_hadamard_relay(const HadamardSpec& spec) {
  check_labels(spec.in_labels, "make_hadamard_relay inputs");
  const long din = total_dim(spec.in_labels);
  if (spec.measure.dim() != din) {
    throw DimensionError("make_hadamard_relay: POVM dim does not match inputs");
  }
  if (spec.prepare.size() != spec.measure.size()) {
    throw ValidationError("make_hadamard_relay: need one prepared state per outcome");
  }
  const auto& b_labels = spec.prepare[0].labels();
  for (const auto& st : spec.prepare) {
    if (st.labels().size() != b_labels.size() || st.dim() != spec.prepare[0].dim()) {
      throw DimensionError("make_hadamard_relay: inconsistent prepared states");
    }
  }
  const long db = spec.prepare[0].dim();
  const long ny = static_cast<long>(spec.measure.size());
  std::vector<Matrix> kraus;
  for (long y = 0; y < ny; ++y) {
    Eigen::SelfAdjointEigenSolver<Matrix> mez(hermitize(spec.measure.elements()[y]));
    Eigen::SelfAdjointEigenSolver<Matrix> prez(hermitize(spec.prepare[y].matrix()));
    for (long j = 0; j < mez.eigenvalues().size(); ++j) {
      const double g = mez.eigenvalues()(j);
      if (g < 1e-14) continue;
      for (long i = 0; i < prez.eigenvalues().size(); ++i) {
        const double s = prez.eigenvalues()(i);
        if (s < 1e-14) continue;
        // K = sqrt(g s) (|psi_i> ⊗ |y>) <phi_j|
        Matrix k = Matrix::Zero(db * ny, din);
        for (long b = 0; b < db; ++b) {
          k.row(b * ny + y) =
              std::sqrt(g * s) * prez.eigenvectors()(b, i) * mez.eigenvectors().col(j).adjoint();
        }
        kraus.push_back(std::move(k));
      }
    }
  }
  std::vector<SubsystemLabel> out_labels = b_labels;
  out_labels.push_back(classical_label(spec.outcome_name, ny));
  QuantumChannel ch(spec.in_labels, std::move(out_labels), std::move(kraus));
  RelayChannel relay(std::move(ch), spec.relay_in, spec.outcome_name);
  relay.tags.hadamard = true;
  relay.tags.degraded = true;
  relay.tags.degraded_residual = 0.0;
  return relay;
}

// Classical-quantum relay channel: classical inputs are read out in the
// computational basis and the tabulated joint output state is emitted.
// table[k] is indexed by the joint input index (first input most
// significant).
inline RelayChannel make_cq_relay(std::vector<SubsystemLabel> in_labels, std::string relay_in,
                                  const std::vector<DensityOperator>& table,
                                  std::string relay_out) {
  check_labels(in_labels, "make_cq_relay inputs");
  for (auto& l : in_labels) l.kind = LabelKind::classical;
  const long din = total_dim(in_labels);
  if (static_cast<long>(table.size()) != din) {
    throw DimensionError("make_cq_relay: table must cover every input tuple");
  }
  const long dout = table[0].dim();
  const auto out_labels = table[0].labels();
  std::vector<Matrix> kraus;
  for (long c = 0; c < din; ++c) {
    if (table[c].dim() != dout || table[c].labels().size() != out_labels.size()) {
      throw DimensionError("make_cq_relay: inconsistent output dims in table");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(table[c].matrix()));
    for (long i = 0; i < solver.eigenvalues().size(); ++i) {
      const double s = solver.eigenvalues()(i);
      if (s < 1e-14) continue;
      Matrix k = Matrix::Zero(dout, din);
      k.col(c) = std::sqrt(s) * solver.eigenvectors().col(i);
      kraus.push_back(std::move(k));
    }
  }
  QuantumChannel ch(std::move(in_labels), out_labels, std::move(kraus));
  RelayChannel relay(std::move(ch), std::move(relay_in), std::move(relay_out));
  relay.tags.classical_quantum = true;
  return relay;
}

// Relay-less binary symmetric c-q channel (degenerate relay input/output).
inline RelayChannel make_bsc_cq(double flip) {
  if (flip < 0.0 || flip > 1.0) throw ValidationError("make_bsc_cq: flip outside [0,1]");
  std::vector<DensityOperator> table;
  const SubsystemLabel b = quantum_label("B", 2);
  const SubsystemLabel e = quantum_label("E", 1);
  for (long x = 0; x < 2; ++x) {
    Matrix m = Matrix::Zero(2, 2);
    m(x, x) = 1.0 - flip;
    m(1 - x, 1 - x) = flip;
    table.push_back(tensor(DensityOperator({b}, std::move(m)),
                           DensityOperator({e}, Matrix::Identity(1, 1))));
  }
  return make_cq_relay({classical_label("X0", 2), classical_label("X1", 1)}, "X1", table, "E");
}

struct DegradedResult {
  bool degraded;
  double residual;  // I(refs; B | E) on the Choi state
};

// Quantum-Markov-chain test on the Choi state over the joint input (A, D):
// the channel is degraded iff I(refs; B | E) vanishes. The residual is
// reported so borderline cases stay visible.
inline DegradedResult is_degraded(const RelayChannel& ch) {
  const DensityOperator choi = choi_state(ch.channel());
  std::vector<std::string> refs;
  for (const auto& l : ch.channel().in_labels()) refs.push_back("R_" + l.name);
  const double residual =
      conditional_mutual_information(choi, refs, ch.dest_names(), {ch.relay_out()});
  return DegradedResult{residual <= kDegradedResidualTol, residual};
}

struct OrcResult {
  bool orc;
  double distance;  // trace distance between the Choi state and the product of its factors
  DensityOperator choi_broadcast;  // labels [R_A..., B1..., E]
  DensityOperator choi_direct;     // labels [R_D, B2...]
};

// Tests whether the Choi state factorizes as choi(M_{A->B1 E}) ⊗
// choi(P_{D->B2}) for the declared (B1, B2) split.
inline OrcResult check_orc(const RelayChannel& ch) {
  if (!ch.has_split()) {
    throw LabelError("check_orc: channel lacks B1/B2 factorization metadata");
  }
  const DensityOperator choi = choi_state(ch.channel());
  std::vector<std::string> m_keep;
  for (const auto& l : ch.sender_labels()) m_keep.push_back("R_" + l.name);
  for (const auto& n : ch.b1_names()) m_keep.push_back(n);
  m_keep.push_back(ch.relay_out());
  std::vector<std::string> p_keep = {"R_" + ch.relay_in()};
  for (const auto& n : ch.b2_names()) p_keep.push_back(n);

  DensityOperator choi_m = aligned(partial_trace(choi, m_keep), m_keep);
  DensityOperator choi_p = aligned(partial_trace(choi, p_keep), p_keep);
  DensityOperator product = tensor(choi_m, choi_p);
  std::vector<std::string> order;
  for (const auto& l : choi.labels()) order.push_back(l.name);
  const double dist = trace_distance(choi.matrix(), aligned(product, order).matrix());
  return OrcResult{dist <= kOrcDistanceTol, dist, std::move(choi_m), std::move(choi_p)};
}

inline bool is_orc(const RelayChannel& ch) { return check_orc(ch).orc; }

// Broadcast component M_{A -> B1 E} recovered from the Choi factor.
inline QuantumChannel orc_broadcast_channel(const RelayChannel& ch, const OrcResult& orc) {
  if (!orc.orc) throw ValidationError("orc_broadcast_channel: channel is not ORC");
  std::vector<SubsystemLabel> outs;
  for (const auto& n : ch.b1_names()) {
    outs.push_back(ch.channel().out_labels()[find_label(ch.channel().out_labels(), n)]);
  }
  outs.push_back(ch.relay_out_label());
  return kraus_from_choi(orc.choi_broadcast, ch.sender_labels(), std::move(outs));
}

// Direct component P_{D -> B2}.
inline QuantumChannel orc_direct_channel(const RelayChannel& ch, const OrcResult& orc) {
  if (!orc.orc) throw ValidationError("orc_direct_channel: channel is not ORC");
  std::vector<SubsystemLabel> outs;
  for (const auto& n : ch.b2_names()) {
    outs.push_back(ch.channel().out_labels()[find_label(ch.channel().out_labels(), n)]);
  }
  return kraus_from_choi(orc.choi_direct, {ch.relay_in_label()}, std::move(outs));
}

// Runs all classifiers and stores the results on the channel.
inline void classify(RelayChannel& ch) {
  const DegradedResult d = is_degraded(ch);
  ch.tags.degraded = d.degraded;
  ch.tags.degraded_residual = d.residual;
  if (ch.has_split()) {
    const OrcResult o = check_orc(ch);
    ch.tags.orc = o.orc;
    ch.tags.orc_distance = o.distance;
  }
  if (d.degraded && ch.relay_out_label().kind == LabelKind::classical) {
    ch.tags.hadamard = true;
  }
}

}  // namespace qrelay
