#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrelay/bounds.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/common.hpp"
#include "qrelay/density.hpp"
#include "qrelay/relay.hpp"

namespace qrelay {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline SubsystemLabel label_from_json(const json& j) {
  SubsystemLabel l;
  l.name = j.at("name").get<std::string>();
  l.dim = j.at("dim").get<long>();
  const std::string kind = j.value("kind", "quantum");
  if (kind == "quantum") {
    l.kind = LabelKind::quantum;
  } else if (kind == "classical") {
    l.kind = LabelKind::classical;
  } else {
    throw ValidationError("label '" + l.name + "': unknown kind '" + kind + "'");
  }
  return l;
}

inline json label_to_json(const SubsystemLabel& l) {
  return json{{"name", l.name},
              {"dim", l.dim},
              {"kind", l.kind == LabelKind::classical ? "classical" : "quantum"}};
}

// Complex matrices are nested arrays of [re, im] pairs.
inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("matrix: expected nested arrays");
  const long rows = static_cast<long>(j.size());
  const long cols = static_cast<long>(j.at(0).size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (static_cast<long>(row.size()) != cols) throw ValidationError("matrix: ragged rows");
    for (long c = 0; c < cols; ++c) {
      const auto& e = row.at(c);
      if (!e.is_array() || e.size() != 2) {
        throw ValidationError("matrix: entries must be [re, im] pairs");
      }
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

inline json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    out.push_back(std::move(row));
  }
  return out;
}

// A channel file plus whatever named parameters it carried (builtins keep
// their parameters visible so configs can refer to them).
struct LoadedChannel {
  RelayChannel relay;
  std::optional<double> p, q, flip;
  std::string builtin;
};

inline LoadedChannel load_relay_channel(const json& j) {
  if (j.contains("builtin")) {
    const std::string name = j.at("builtin").get<std::string>();
    if (name == "depolarizing_relay") {
      const double p = j.value("p", 0.0);
      const double q = j.value("q", 0.0);
      return LoadedChannel{make_depolarizing_relay(p, q), p, q, std::nullopt, name};
    }
    if (name == "wired_relay") {
      return LoadedChannel{make_wired_relay(), std::nullopt, std::nullopt, std::nullopt, name};
    }
    if (name == "cq_bsc") {
      const double flip = j.value("flip", 0.1);
      return LoadedChannel{make_bsc_cq(flip), std::nullopt, std::nullopt, flip, name};
    }
    throw ValidationError("unknown builtin channel '" + name + "'");
  }
  std::vector<SubsystemLabel> ins, outs;
  for (const auto& l : j.at("inputs")) ins.push_back(label_from_json(l));
  for (const auto& l : j.at("outputs")) outs.push_back(label_from_json(l));
  std::vector<Matrix> kraus;
  for (const auto& k : j.at("kraus")) kraus.push_back(matrix_from_json(k));
  QuantumChannel ch(std::move(ins), std::move(outs), std::move(kraus));

  std::string relay_in, relay_out;
  std::vector<std::string> b1, b2;
  if (!j.contains("roles")) throw ValidationError("channel spec lacks a role map");
  for (const auto& [name, role_j] : j.at("roles").items()) {
    const std::string role = role_j.get<std::string>();
    if (role == "relay_in") {
      if (!relay_in.empty()) throw ValidationError("role map: two relay_in labels");
      relay_in = name;
    } else if (role == "relay_out") {
      if (!relay_out.empty()) throw ValidationError("role map: two relay_out labels");
      relay_out = name;
    } else if (role == "dest_out_1") {
      b1.push_back(name);
    } else if (role == "dest_out_2") {
      b2.push_back(name);
    } else if (role != "sender_in" && role != "dest_out") {
      throw ValidationError("role map: unknown role '" + role + "'");
    }
  }
  if (relay_in.empty() || relay_out.empty()) {
    throw ValidationError("role map must assign relay_in and relay_out");
  }
  return LoadedChannel{RelayChannel(std::move(ch), relay_in, relay_out, b1, b2),
                       std::nullopt, std::nullopt, std::nullopt, ""};
}

inline LoadedChannel load_relay_channel_file(const std::string& path) {
  return load_relay_channel(load_json_file(path));
}

inline json relay_channel_to_json(const RelayChannel& ch) {
  json j;
  j["inputs"] = json::array();
  for (const auto& l : ch.channel().in_labels()) j["inputs"].push_back(label_to_json(l));
  j["outputs"] = json::array();
  for (const auto& l : ch.channel().out_labels()) j["outputs"].push_back(label_to_json(l));
  j["kraus"] = json::array();
  for (const auto& k : ch.channel().kraus()) j["kraus"].push_back(matrix_to_json(k));
  json roles;
  for (const auto& l : ch.channel().in_labels()) {
    roles[l.name] = l.name == ch.relay_in() ? "relay_in" : "sender_in";
  }
  for (const auto& l : ch.channel().out_labels()) {
    if (l.name == ch.relay_out()) {
      roles[l.name] = "relay_out";
    } else if (ch.has_split()) {
      bool in_b1 = false;
      for (const auto& n : ch.b1_names()) in_b1 = in_b1 || n == l.name;
      roles[l.name] = in_b1 ? "dest_out_1" : "dest_out_2";
    } else {
      roles[l.name] = "dest_out";
    }
  }
  j["roles"] = std::move(roles);
  return j;
}

// ---- bound configuration files ----

inline DensityOperator state_from_json(const json& j, std::vector<SubsystemLabel> labels) {
  const std::string type = j.value("type", "matrix");
  const long d = total_dim(labels);
  if (type == "matrix") {
    return DensityOperator(std::move(labels), matrix_from_json(j.at("data")));
  }
  if (type == "basis") {
    Matrix m = Matrix::Zero(d, d);
    const long idx = j.at("index").get<long>();
    if (idx < 0 || idx >= d) throw ValidationError("basis state index out of range");
    m(idx, idx) = 1.0;
    return DensityOperator(std::move(labels), std::move(m));
  }
  if (type == "maximally_mixed") {
    return maximally_mixed(std::move(labels));
  }
  if (type == "pure") {
    const auto& amps = j.at("amplitudes");
    if (static_cast<long>(amps.size()) != d) {
      throw ValidationError("pure state: amplitude count mismatch");
    }
    CVector v(d);
    for (long i = 0; i < d; ++i) {
      v(i) = Complex(amps.at(i).at(0).get<double>(), amps.at(i).at(1).get<double>());
    }
    return pure_state(std::move(labels), v);
  }
  if (type == "pure_sparse") {
    CVector v = CVector::Zero(d);
    for (const auto& term : j.at("terms")) {
      const long i = term.at("index").get<long>();
      if (i < 0 || i >= d) throw ValidationError("pure_sparse: index out of range");
      v(i) = Complex(term.value("re", 0.0), term.value("im", 0.0));
    }
    return pure_state(std::move(labels), v);
  }
  throw ValidationError("unknown state type '" + type + "'");
}

inline Ensemble ensemble_from_json(const json& j) {
  std::vector<ClassicalVar> vars;
  for (const auto& v : j.at("variables")) {
    vars.push_back({v.at("name").get<std::string>(), v.at("card").get<long>()});
  }
  std::vector<double> pmf = j.at("pmf").get<std::vector<double>>();
  std::vector<StateFamily> families;
  for (const auto& f : j.value("families", json::array())) {
    StateFamily fam;
    fam.variable = f.at("variable").get<std::string>();
    std::vector<SubsystemLabel> labels;
    for (const auto& l : f.at("labels")) labels.push_back(label_from_json(l));
    for (const auto& s : f.at("states")) fam.states.push_back(state_from_json(s, labels));
    families.push_back(std::move(fam));
  }
  return Ensemble(std::move(vars), std::move(pmf), std::move(families));
}

struct EvalConfig {
  std::string bound;  // pdf | full_df | hadamard | mf | af | depolarizing_closed_form
  std::optional<Ensemble> ensemble;
  std::optional<MFConfig> mf;
  std::optional<AFConfig> af;
};

inline EvalConfig parse_eval_config(const json& j, const LoadedChannel& lc) {
  EvalConfig out;
  out.bound = j.at("bound").get<std::string>();
  if (out.bound == "pdf" || out.bound == "full_df" || out.bound == "hadamard") {
    out.ensemble = ensemble_from_json(j.at("ensemble"));
    return out;
  }
  if (out.bound == "mf") {
    Ensemble ens0 = ensemble_from_json(j.at("ens0"));
    Ensemble ens1 = ensemble_from_json(j.at("ens1"));
    const long e_dim = lc.relay.relay_out_label().dim;
    POVM povm = [&]() {
      const auto& pj = j.at("relay_povm");
      if (pj.is_string() && pj.get<std::string>() == "computational") {
        return computational_povm(e_dim);
      }
      std::vector<Matrix> els;
      for (const auto& e : pj.at("elements")) els.push_back(matrix_from_json(e));
      return POVM(std::move(els));
    }();
    const long card_z = j.value("card_z1", 2L);
    const long card_y = static_cast<long>(povm.size());
    const long card_x1 = ens1.vars()[0].card;
    std::vector<double> table;
    const auto& cj = j.at("compressor");
    const std::string ctype = cj.value("type", "table");
    if (ctype == "table") {
      table = cj.at("rows").get<std::vector<double>>();
    } else if (ctype == "xor_bernoulli") {
      // Z1 = Y1 xor Bernoulli(alpha); alpha may be the literal "q/2",
      // resolved from the channel's q parameter.
      double alpha = 0.0;
      const auto& aj = cj.at("alpha");
      if (aj.is_string()) {
        if (aj.get<std::string>() != "q/2") {
          throw ValidationError("compressor alpha: only \"q/2\" or a number is accepted");
        }
        if (!lc.q) {
          throw ValidationError("compressor alpha \"q/2\" needs a channel with a q parameter");
        }
        alpha = *lc.q / 2.0;
      } else {
        alpha = aj.get<double>();
      }
      if (card_y != 2 || card_z != 2) {
        throw ValidationError("xor_bernoulli compressor requires binary Y1 and Z1");
      }
      for (long x1 = 0; x1 < card_x1; ++x1) {
        for (long y = 0; y < card_y; ++y) {
          for (long zz = 0; zz < card_z; ++zz) {
            table.push_back(zz == y ? 1.0 - alpha : alpha);
          }
        }
      }
    } else {
      throw ValidationError("unknown compressor type '" + ctype + "'");
    }
    out.mf = MFConfig{std::move(ens0), std::move(ens1), std::move(povm), card_z,
                      std::move(table)};
    return out;
  }
  if (out.bound == "af") {
    AFConfig cfg{ensemble_from_json(j.at("ens1")), ensemble_from_json(j.at("ens2"))};
    cfg.g0 = j.value("g0", "G0");
    cfg.g1 = j.value("g1", "G1");
    cfg.g2 = j.value("g2", "G2");
    cfg.floor_q = j.value("floor_q", false);
    out.af = std::move(cfg);
    return out;
  }
  if (out.bound == "depolarizing_closed_form") {
    return out;
  }
  throw ValidationError("unknown bound '" + out.bound + "'");
}

}  // namespace qrelay
