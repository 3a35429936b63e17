#pragma once

#include <map>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/common.hpp"
#include "qrelay/density.hpp"
#include "qrelay/entropy.hpp"
#include "qrelay/relay.hpp"

namespace qrelay {

struct ClassicalVar {
  std::string name;
  long card = 1;
};

// Input states attached to one classical variable; states[k] is used when the
// variable takes value k. The labels may extend beyond the channel inputs
// (entangled reference registers ride along untouched).
struct StateFamily {
  std::string variable;
  std::vector<DensityOperator> states;
};

// A finite classical distribution over named variables together with the
// per-symbol input states. The input state of a tuple is the tensor product
// of its family states, so ensembles are product-form across families by
// construction.
class Ensemble {
 public:
  Ensemble(std::vector<ClassicalVar> vars, std::vector<double> pmf,
           std::vector<StateFamily> families)
      : vars_(std::move(vars)), pmf_(std::move(pmf)), families_(std::move(families)) {
    if (vars_.empty()) throw ValidationError("Ensemble: no variables");
    long c = 1;
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].card < 1) throw ValidationError("Ensemble: cardinality < 1");
      for (size_t j = i + 1; j < vars_.size(); ++j) {
        if (vars_[i].name == vars_[j].name) {
          throw LabelError("Ensemble: duplicate variable '" + vars_[i].name + "'");
        }
      }
      c *= vars_[i].card;
    }
    if (static_cast<long>(pmf_.size()) != c) {
      throw ValidationError("Ensemble: pmf has " + std::to_string(pmf_.size()) +
                            " entries, expected " + std::to_string(c));
    }
    double sum = 0.0;
    for (double& p : pmf_) {
      if (p < -kPmfTol) throw ValidationError("Ensemble: negative probability");
      if (p < 0.0) p = 0.0;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfTol) {
      throw ValidationError("Ensemble: pmf sums to " + std::to_string(sum));
    }
    for (const auto& fam : families_) {
      const int vi = var_index(fam.variable);
      if (vi < 0) throw LabelError("Ensemble: family for unknown variable '" + fam.variable + "'");
      if (static_cast<long>(fam.states.size()) != vars_[vi].card) {
        throw ValidationError("Ensemble: family for '" + fam.variable + "' has " +
                              std::to_string(fam.states.size()) + " states, expected " +
                              std::to_string(vars_[vi].card));
      }
      for (const auto& st : fam.states) {
        if (st.labels().size() != fam.states[0].labels().size() ||
            st.dim() != fam.states[0].dim()) {
          throw DimensionError("Ensemble: inconsistent state dims for '" + fam.variable + "'");
        }
      }
    }
    std::vector<std::string> seen;
    for (const auto& fam : families_) {
      for (const auto& other : seen) {
        if (other == fam.variable) {
          throw LabelError("Ensemble: two families for variable '" + fam.variable + "'");
        }
      }
      seen.push_back(fam.variable);
    }
  }

  const std::vector<ClassicalVar>& vars() const { return vars_; }
  const std::vector<double>& pmf() const { return pmf_; }
  const std::vector<StateFamily>& families() const { return families_; }

  int var_index(std::string_view name) const {
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  long classical_dim() const {
    long c = 1;
    for (const auto& v : vars_) c *= v.card;
    return c;
  }

  std::vector<long> tuple_of(long flat) const {
    std::vector<long> t(vars_.size());
    for (size_t i = vars_.size(); i-- > 0;) {
      t[i] = flat % vars_[i].card;
      flat /= vars_[i].card;
    }
    return t;
  }

  // Joint input state for a tuple: tensor product over families.
  DensityOperator input_state(const std::vector<long>& tuple) const {
    if (families_.empty()) throw ValidationError("Ensemble: no state families");
    DensityOperator out = families_[0].states[tuple[var_index(families_[0].variable)]];
    for (size_t f = 1; f < families_.size(); ++f) {
      out = tensor(out, families_[f].states[tuple[var_index(families_[f].variable)]]);
    }
    return out;
  }

  // Identifies the distinct input state of a tuple (values of family vars).
  std::vector<long> family_key(const std::vector<long>& tuple) const {
    std::vector<long> key;
    for (const auto& fam : families_) key.push_back(tuple[var_index(fam.variable)]);
    return key;
  }

 private:
  std::vector<ClassicalVar> vars_;
  std::vector<double> pmf_;
  std::vector<StateFamily> families_;
};

// Tensor of two independent ensembles (product pmf, concatenated families).
inline Ensemble product_ensemble(const Ensemble& a, const Ensemble& b) {
  std::vector<ClassicalVar> vars = a.vars();
  vars.insert(vars.end(), b.vars().begin(), b.vars().end());
  std::vector<double> pmf;
  pmf.reserve(a.pmf().size() * b.pmf().size());
  for (double pa : a.pmf()) {
    for (double pb : b.pmf()) pmf.push_back(pa * pb);
  }
  std::vector<StateFamily> fams = a.families();
  fams.insert(fams.end(), b.families().begin(), b.families().end());
  return Ensemble(std::move(vars), std::move(pmf), std::move(fams));
}

// Builds the classical-quantum joint state
//   sum_t p(t) |t><t| ⊗ channel(input_state(t)),
// with one classical register per ensemble variable.
inline DensityOperator classical_quantum_joint(const QuantumChannel& ch, const Ensemble& ens) {
  const long c = ens.classical_dim();
  std::map<std::vector<long>, Matrix> cache;
  std::vector<SubsystemLabel> quantum_labels;
  long dq = 0;
  for (long t = 0; t < c; ++t) {
    if (ens.pmf()[t] <= 0.0) continue;
    const auto tuple = ens.tuple_of(t);
    const auto key = ens.family_key(tuple);
    if (!cache.count(key)) {
      DensityOperator out = apply_channel(ch, ens.input_state(tuple));
      if (quantum_labels.empty()) {
        quantum_labels = out.labels();
        dq = out.dim();
        check_dimension_cap(c * dq, "classical_quantum_joint");
      }
      cache.emplace(key, out.matrix());
    }
  }
  if (quantum_labels.empty()) {
    throw ValidationError("classical_quantum_joint: empty ensemble support");
  }
  Matrix joint = Matrix::Zero(c * dq, c * dq);
  for (long t = 0; t < c; ++t) {
    const double p = ens.pmf()[t];
    if (p <= 0.0) continue;
    joint.block(t * dq, t * dq, dq, dq) = p * cache.at(ens.family_key(ens.tuple_of(t)));
  }
  std::vector<SubsystemLabel> labels;
  for (const auto& v : ens.vars()) labels.push_back(classical_label(v.name, v.card));
  for (const auto& l : quantum_labels) {
    if (find_label(labels, l.name) >= 0) {
      throw LabelError("classical_quantum_joint: variable '" + l.name +
                       "' collides with a channel label");
    }
    labels.push_back(l);
  }
  return DensityOperator(std::move(labels), std::move(joint));
}

// Evaluator output: every bracket term is reported, not just the minimum, so
// the bottleneck is observable.
struct BoundReport {
  double rate = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  int min_term = -1;
  bool feasible = true;
  double constraint_lhs = 0.0;
  double constraint_rhs = 0.0;
  std::vector<std::pair<std::string, double>> details;
};

namespace detail {

inline void finish_min(BoundReport& r) {
  r.rate = r.terms[0].second;
  r.min_term = 0;
  for (size_t i = 1; i < r.terms.size(); ++i) {
    if (r.terms[i].second < r.rate) {
      r.rate = r.terms[i].second;
      r.min_term = static_cast<int>(i);
    }
  }
}

inline void check_family_targets(const Ensemble& ens, const std::string& var,
                                 const std::vector<std::string>& wanted,
                                 const std::vector<std::string>& excluded = {}) {
  for (const auto& fam : ens.families()) {
    if (fam.variable != var) continue;
    for (const auto& name : wanted) {
      if (!fam.states[0].has(name)) {
        throw LabelError("ensemble family for '" + var + "' does not cover channel input '" +
                         name + "'");
      }
    }
    for (const auto& name : excluded) {
      if (fam.states[0].has(name)) {
        throw ValidationError("ensemble family for '" + var + "' must not touch input '" + name +
                              "' (product-form input required)");
      }
    }
    return;
  }
  throw LabelError("ensemble lacks a state family for variable '" + var + "'");
}

}  // namespace detail

// Partial decode-forward rate for a fixed ensemble over (U, X0, X1):
//   min{ I(X0 X1; B), I(U; E | X1) + I(X0; B | X1 U) }.
// Variables are positional: vars[0]=U (no states), vars[1]=X0 (sender
// states), vars[2]=X1 (relay states).
inline BoundReport eval_pdf(const RelayChannel& ch, const Ensemble& ens) {
  if (ens.vars().size() != 3) {
    throw ValidationError("eval_pdf: expected variables (U, X0, X1)");
  }
  const std::string u = ens.vars()[0].name;
  const std::string x0 = ens.vars()[1].name;
  const std::string x1 = ens.vars()[2].name;
  for (const auto& fam : ens.families()) {
    if (fam.variable == u) throw ValidationError("eval_pdf: U must not carry input states");
  }
  detail::check_family_targets(ens, x0, ch.sender_names(), {ch.relay_in()});
  detail::check_family_targets(ens, x1, {ch.relay_in()});
  const DensityOperator omega = classical_quantum_joint(ch.channel(), ens);
  const auto b = ch.dest_names();
  const double multicast = mutual_information(omega, {x0, x1}, b);
  const double relay_part = conditional_mutual_information(omega, {u}, {ch.relay_out()}, {x1});
  const double direct_part = conditional_mutual_information(omega, {x0}, b, {x1, u});
  BoundReport r;
  r.terms = {{"multicast", multicast}, {"relay_plus_direct", relay_part + direct_part}};
  r.details = {{"relay_decode", relay_part}, {"direct_decode", direct_part}};
  detail::finish_min(r);
  return r;
}

// Full decode-forward: min{ I(X0 X1; B), I(X0; E | X1) } over (X0, X1).
inline BoundReport eval_full_df(const RelayChannel& ch, const Ensemble& ens) {
  if (ens.vars().size() != 2) {
    throw ValidationError("eval_full_df: expected variables (X0, X1)");
  }
  const std::string x0 = ens.vars()[0].name;
  const std::string x1 = ens.vars()[1].name;
  detail::check_family_targets(ens, x0, ch.sender_names(), {ch.relay_in()});
  detail::check_family_targets(ens, x1, {ch.relay_in()});
  const DensityOperator omega = classical_quantum_joint(ch.channel(), ens);
  BoundReport r;
  r.terms = {{"multicast", mutual_information(omega, {x0, x1}, ch.dest_names())},
             {"relay_decode",
              conditional_mutual_information(omega, {x0}, {ch.relay_out()}, {x1})}};
  detail::finish_min(r);
  return r;
}

// Lifts a (X0, X1) ensemble to (U, X0, X1) with U a copy of X0.
inline Ensemble lift_u_equal_x0(const Ensemble& ens, const std::string& u_name = "U") {
  if (ens.vars().size() != 2) {
    throw ValidationError("lift_u_equal_x0: expected variables (X0, X1)");
  }
  const long c0 = ens.vars()[0].card;
  const long c1 = ens.vars()[1].card;
  std::vector<ClassicalVar> vars = {{u_name, c0}, ens.vars()[0], ens.vars()[1]};
  std::vector<double> pmf(c0 * c0 * c1, 0.0);
  for (long x0 = 0; x0 < c0; ++x0) {
    for (long x1 = 0; x1 < c1; ++x1) {
      pmf[(x0 * c0 + x0) * c1 + x1] = ens.pmf()[x0 * c1 + x1];
    }
  }
  return Ensemble(std::move(vars), std::move(pmf), ens.families());
}

// Capacity objective for a Hadamard relay channel:
//   min{ I(X0 X1; B), I(X0; Y1 | X1) }.
inline BoundReport eval_hadamard_capacity(const RelayChannel& ch, const Ensemble& ens) {
  bool hadamard = ch.tags.hadamard;
  if (!hadamard) {
    hadamard = ch.relay_out_label().kind == LabelKind::classical && is_degraded(ch).degraded;
  }
  if (!hadamard) {
    throw ValidationError("eval_hadamard_capacity: channel is not Hadamard");
  }
  BoundReport r = eval_full_df(ch, ens);
  r.terms[1].first = "relay_observation";
  return r;
}

// Measure-forward configuration: independent sender/relay ensembles, a relay
// POVM producing Y1, and a classical compressor p(Z1 | X1, Y1).
struct MFConfig {
  Ensemble ens0;  // variable X0, sender states
  Ensemble ens1;  // variable X1, relay states
  POVM relay_povm;
  long card_z1 = 2;
  std::vector<double> compressor;  // p(z1 | x1, y1), index (x1 * |Y1| + y1) * |Z1| + z1
  std::string y_name = "Y1";
  std::string z_name = "Z1";
};

namespace detail {

// (X1, Y1) -> (X1, Y1, Z1) with Z1 drawn from p(z1 | x1, y1).
inline QuantumChannel compressor_channel(const SubsystemLabel& x1, const SubsystemLabel& y1,
                                         const SubsystemLabel& z1,
                                         const std::vector<double>& table) {
  const long cx = x1.dim, cy = y1.dim, cz = z1.dim;
  if (static_cast<long>(table.size()) != cx * cy * cz) {
    throw DimensionError("compressor: table size mismatch");
  }
  std::vector<Matrix> kraus;
  for (long a = 0; a < cx; ++a) {
    for (long b = 0; b < cy; ++b) {
      double sum = 0.0;
      for (long zz = 0; zz < cz; ++zz) sum += table[(a * cy + b) * cz + zz];
      if (std::abs(sum - 1.0) > kPmfTol) {
        throw ValidationError("compressor: row (x1=" + std::to_string(a) + ", y1=" +
                              std::to_string(b) + ") sums to " + std::to_string(sum));
      }
      for (long zz = 0; zz < cz; ++zz) {
        const double p = table[(a * cy + b) * cz + zz];
        if (p < -kPmfTol) throw ValidationError("compressor: negative entry");
        if (p <= 0.0) continue;
        Matrix k = Matrix::Zero(cx * cy * cz, cx * cy);
        k((a * cy + b) * cz + zz, a * cy + b) = std::sqrt(p);
        kraus.push_back(std::move(k));
      }
    }
  }
  return QuantumChannel({x1, y1}, {x1, y1, z1}, std::move(kraus));
}

}  // namespace detail

// Measure-forward objective I(X0; Z1 B | X1) with the compression constraint
// I(Z1; Y1 | X1 B) <= I(X1; B). Infeasible configurations are reported, not
// rejected, so an optimizer can move across the boundary.
inline BoundReport eval_mf(const RelayChannel& ch, const MFConfig& cfg) {
  if (cfg.ens0.vars().size() != 1 || cfg.ens1.vars().size() != 1) {
    throw ValidationError("eval_mf: ens0/ens1 must each carry a single variable");
  }
  const std::string x0 = cfg.ens0.vars()[0].name;
  const std::string x1 = cfg.ens1.vars()[0].name;
  detail::check_family_targets(cfg.ens0, x0, ch.sender_names(), {ch.relay_in()});
  detail::check_family_targets(cfg.ens1, x1, {ch.relay_in()});
  if (cfg.relay_povm.dim() != ch.relay_out_label().dim) {
    throw DimensionError("eval_mf: POVM dim does not match the relay output");
  }
  const Ensemble joint_ens = product_ensemble(cfg.ens0, cfg.ens1);
  DensityOperator omega = classical_quantum_joint(ch.channel(), joint_ens);
  const SubsystemLabel y1 = classical_label(cfg.y_name, static_cast<long>(cfg.relay_povm.size()));
  const SubsystemLabel z1 = classical_label(cfg.z_name, cfg.card_z1);
  omega = apply_channel(measurement_channel(cfg.relay_povm, ch.relay_out_label(), cfg.y_name),
                        omega);
  omega = apply_channel(
      detail::compressor_channel(classical_label(x1, cfg.ens1.vars()[0].card), y1, z1,
                                 cfg.compressor),
      omega);

  const auto b = ch.dest_names();
  std::vector<std::string> zb = {cfg.z_name};
  zb.insert(zb.end(), b.begin(), b.end());
  std::vector<std::string> x1b = {x1};
  x1b.insert(x1b.end(), b.begin(), b.end());

  BoundReport r;
  const double objective = conditional_mutual_information(omega, {x0}, zb, {x1});
  r.terms = {{"objective", objective}};
  r.rate = objective;
  r.min_term = 0;
  r.constraint_lhs = conditional_mutual_information(omega, {cfg.z_name}, {cfg.y_name}, x1b);
  r.constraint_rhs = mutual_information(omega, {x1}, b);
  r.feasible = r.constraint_lhs <= r.constraint_rhs + 1e-9;
  return r;
}

// Uniform computational-basis measure-forward configuration for the
// depolarizing relay: the relay measures E in the computational basis and
// forwards Z1 = Y1 xor Bernoulli(alpha).
inline MFConfig make_depolarizing_mf_config(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw ValidationError("make_depolarizing_mf_config: alpha outside [0,1]");
  }
  const SubsystemLabel a = quantum_label("A", 2);
  const SubsystemLabel d = quantum_label("D", 2);
  Ensemble ens0({{"X0", 2}}, {0.5, 0.5},
                {{"X0", {basis_state(a, 0), basis_state(a, 1)}}});
  Ensemble ens1({{"X1", 2}}, {0.5, 0.5},
                {{"X1", {basis_state(d, 0), basis_state(d, 1)}}});
  std::vector<double> table;
  for (long x1 = 0; x1 < 2; ++x1) {
    for (long y = 0; y < 2; ++y) {
      for (long z = 0; z < 2; ++z) {
        table.push_back(z == y ? 1.0 - alpha : alpha);
      }
    }
  }
  return MFConfig{std::move(ens0), std::move(ens1), computational_povm(2), 2, std::move(table)};
}

// Assist-forward configuration: pure-state ensembles carrying the
// entanglement registers G0, G1 (broadcast side) and G2 (direct side).
struct AFConfig {
  Ensemble ens1;  // variable X1, pure states on (G0, G1, A)
  Ensemble ens2;  // variable X2, pure states on (G2, D)
  std::string g0 = "G0";
  std::string g1 = "G1";
  std::string g2 = "G2";
  // Eq. (19) uses the raw entanglement rate; flooring negative Q at zero
  // inside the sum is optional.
  bool floor_q = false;
};

namespace detail {

inline void check_pure_families(const Ensemble& ens, const std::string& where) {
  for (const auto& fam : ens.families()) {
    for (const auto& st : fam.states) {
      if (purity(st) < 1.0 - 1e-9) {
        throw ValidationError(where + ": ensemble states must be pure");
      }
    }
  }
}

}  // namespace detail

struct QAssistResult {
  double q;
  double term_dest;   // I(G0 > B1 X1)
  double term_relay;  // I(G1 > E X1)
};

// Entanglement rate Q(M, theta) = min{ I(G0 > B1 X1), I(G1 > E X1) } for a
// broadcast channel M_{A -> B1 E}. May be negative; reported raw.
inline QAssistResult eval_q_assist(const QuantumChannel& m, const Ensemble& ens1,
                                   const std::string& g0, const std::string& g1,
                                   const std::string& e_name) {
  if (ens1.vars().size() != 1) throw ValidationError("eval_q_assist: expected one variable");
  detail::check_pure_families(ens1, "eval_q_assist");
  const std::string x1 = ens1.vars()[0].name;
  const DensityOperator theta = classical_quantum_joint(m, ens1);
  std::vector<std::string> b1x1;
  for (const auto& l : m.out_labels()) {
    if (l.name != e_name) b1x1.push_back(l.name);
  }
  b1x1.push_back(x1);
  const double term_dest = coherent_information(theta, {g0}, b1x1);
  const double term_relay = coherent_information(theta, {g1}, {e_name, x1});
  return QAssistResult{std::min(term_dest, term_relay), term_dest, term_relay};
}

// Assist-forward rate for an ORC relay channel:
//   min{ I(X1; E), I(X2 G2; B2), I(X2; B2) + I(G2 > B2 X2) + Q(M, theta) },
// clamped at zero.
inline BoundReport eval_af(const RelayChannel& ch, const AFConfig& cfg) {
  const OrcResult orc = check_orc(ch);
  if (!orc.orc) {
    throw ValidationError("eval_af: channel does not have orthogonal receiver components");
  }
  detail::check_pure_families(cfg.ens1, "eval_af ens1");
  detail::check_pure_families(cfg.ens2, "eval_af ens2");
  const QuantumChannel m = orc_broadcast_channel(ch, orc);
  const QuantumChannel p = orc_direct_channel(ch, orc);

  const std::string x1 = cfg.ens1.vars()[0].name;
  const DensityOperator theta = classical_quantum_joint(m, cfg.ens1);
  const double relay_decode = mutual_information(theta, {x1}, {ch.relay_out()});
  const QAssistResult qa = eval_q_assist(m, cfg.ens1, cfg.g0, cfg.g1, ch.relay_out());

  const std::string x2 = cfg.ens2.vars()[0].name;
  const DensityOperator zeta = classical_quantum_joint(p, cfg.ens2);
  const auto b2 = ch.b2_names();
  const double ea_full = mutual_information(zeta, {x2, cfg.g2}, b2);
  const double direct_info = mutual_information(zeta, {x2}, b2);
  std::vector<std::string> b2x2 = b2;
  b2x2.push_back(x2);
  const double coherent = coherent_information(zeta, {cfg.g2}, b2x2);
  const double q_used = cfg.floor_q ? std::max(0.0, qa.q) : qa.q;

  BoundReport r;
  r.terms = {{"relay_decode", relay_decode},
             {"ea_full", ea_full},
             {"ea_limited", direct_info + coherent + q_used}};
  detail::finish_min(r);
  r.details = {{"q_assist", qa.q},
               {"q_dest", qa.term_dest},
               {"q_relay", qa.term_relay},
               {"direct_info", direct_info},
               {"coherent_info", coherent}};
  r.rate = std::max(0.0, r.rate);
  return r;
}

// Closed-form measure-forward rate of the depolarizing relay family:
// 1 - h(p * q/2).
inline double eval_depolarizing_closed_form(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0) {
    throw ValidationError("eval_depolarizing_closed_form: parameters outside [0,1]");
  }
  return 1.0 - binary_entropy(binary_convolve(p, q / 2.0));
}

}  // namespace qrelay
