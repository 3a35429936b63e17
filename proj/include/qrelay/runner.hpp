#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qrelay/codesim.hpp"
#include "qrelay/json_io.hpp"
#include "qrelay/optimizer.hpp"

namespace qrelay {

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Everything needed to reproduce a run. Identical manifests produce
// byte-identical outputs.
struct RunManifest {
  std::string command;
  std::string channel_path;
  std::string config_path;
  std::string out_path;
  uint64_t seed = 1;
  int restarts = 0;     // 0 = take the config's value
  double tol = 0.0;     // 0 = default
  std::string cards;    // e.g. "U=2,X0=2,X1=1"

  json to_json() const {
    return json{{"command", command}, {"channel", channel_path}, {"config", config_path},
                {"out", out_path},    {"seed", seed},            {"restarts", restarts},
                {"tol", tol},         {"cards", cards}};
  }

  // Provenance hash over the computation's identity; the output location is
  // not part of it, so re-running into a different file reproduces the rows.
  std::string hash() const {
    json j = to_json();
    j.erase("out");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return std::string(buf);
  }
};

struct RunResult {
  int exit_code = 0;
  std::string csv;     // tabular output (may be empty for classify)
  std::string report;  // human-readable log lines
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline void append_report_row(std::ostringstream& csv, const std::string& bound,
                              const BoundReport& rep, const std::string& hash) {
  csv << bound << "," << fmt(rep.rate) << "," << rep.min_term;
  csv << ",\"";
  for (size_t i = 0; i < rep.terms.size(); ++i) {
    if (i) csv << ";";
    csv << rep.terms[i].first << "=" << fmt(rep.terms[i].second);
  }
  for (const auto& [k, v] : rep.details) csv << ";" << k << "=" << fmt(v);
  csv << "\"," << fmt(rep.constraint_lhs) << "," << fmt(rep.constraint_rhs) << ","
      << (rep.feasible ? "1" : "0") << "," << hash << "\n";
}

inline ParamSpace space_from_config(const json& cfg, const LoadedChannel& lc) {
  ParamSpace space;
  const std::string target = cfg.value("target", "direct");
  if (target == "direct") {
    space.target = OptTarget::direct_transmission;
  } else if (target == "pdf") {
    space.target = OptTarget::partial_decode_forward;
  } else if (target == "full_df") {
    space.target = OptTarget::full_decode_forward;
  } else if (target == "mf") {
    space.target = OptTarget::measure_forward;
  } else if (target == "af") {
    space.target = OptTarget::assist_forward;
  } else {
    throw ValidationError("unknown optimization target '" + target + "'");
  }
  if (cfg.value("state_kind", "pure") == std::string("mixed")) {
    space.state_kind = StateKind::mixed;
  }
  if (cfg.value("povm", "") == std::string("computational")) {
    space.fixed_povm = computational_povm(lc.relay.relay_out_label().dim);
  }
  return space;
}

inline void apply_cards(ParamSpace& space, const std::string& cards) {
  if (cards.empty()) return;
  std::istringstream in(cards);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("bad --cards entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    const long value = std::stol(item.substr(eq + 1));
    if (key == "U") space.card_u = value;
    else if (key == "X0") space.card_x0 = value;
    else if (key == "X1") space.card_x1 = value;
    else if (key == "X2") space.card_x2 = value;
    else if (key == "Y1") space.card_y1 = value;
    else if (key == "Z1") space.card_z1 = value;
    else if (key == "G0") space.dim_g0 = value;
    else if (key == "G1") space.dim_g1 = value;
    else if (key == "G2") space.dim_g2 = value;
    else throw ValidationError("bad --cards key '" + key + "'");
  }
}

}  // namespace detail

// eval: run one bound evaluator on a channel + configuration pair.
inline RunResult run_eval(const RunManifest& m) {
  RunResult out;
  const LoadedChannel lc = load_relay_channel_file(m.channel_path);
  const EvalConfig cfg = parse_eval_config(load_json_file(m.config_path), lc);
  std::ostringstream csv;
  csv << "bound,rate,bottleneck,terms,constraint_lhs,constraint_rhs,feasible,manifest\n";
  BoundReport rep;
  if (cfg.bound == "pdf") {
    rep = eval_pdf(lc.relay, *cfg.ensemble);
  } else if (cfg.bound == "full_df") {
    rep = eval_full_df(lc.relay, *cfg.ensemble);
  } else if (cfg.bound == "hadamard") {
    rep = eval_hadamard_capacity(lc.relay, *cfg.ensemble);
  } else if (cfg.bound == "mf") {
    rep = eval_mf(lc.relay, *cfg.mf);
  } else if (cfg.bound == "af") {
    rep = eval_af(lc.relay, *cfg.af);
  } else if (cfg.bound == "depolarizing_closed_form") {
    if (!lc.p || !lc.q) {
      throw ValidationError("depolarizing_closed_form needs the depolarizing builtin channel");
    }
    rep.rate = eval_depolarizing_closed_form(*lc.p, *lc.q);
    rep.terms = {{"closed_form", rep.rate}};
    rep.min_term = 0;
  }
  detail::append_report_row(csv, cfg.bound, rep, m.hash());
  out.csv = csv.str();
  out.report = "eval " + cfg.bound + ": rate = " + detail::fmt(rep.rate);
  return out;
}

// sweep: depolarizing family over a (p, q) grid; closed form vs. the
// measure-forward evaluator, optionally plus an optimizer column.
inline RunResult run_sweep(const RunManifest& m) {
  RunResult out;
  const json cfg = load_json_file(m.config_path);
  const auto p_grid = cfg.at("p_grid").get<std::vector<double>>();
  const auto q_grid = cfg.at("q_grid").get<std::vector<double>>();
  if (p_grid.empty() || q_grid.empty()) throw ValidationError("sweep: empty grid");
  const bool optimize = cfg.value("optimize", false);
  std::ostringstream csv;
  csv << "p,q,closed_form,mf_rate,mf_lhs,mf_rhs,mf_feasible,opt_rate,manifest\n";
  const std::string hash = m.hash();
  for (double p : p_grid) {
    for (double q : q_grid) {
      const RelayChannel relay = make_depolarizing_relay(p, q);
      const double closed = eval_depolarizing_closed_form(p, q);
      const BoundReport rep = eval_mf(relay, make_depolarizing_mf_config(q / 2.0));
      std::string opt = "";
      if (optimize) {
        ParamSpace space;
        space.target = OptTarget::measure_forward;
        space.card_x0 = 2;
        space.card_x1 = 2;
        space.card_z1 = 2;
        space.fixed_povm = computational_povm(2);
        detail::apply_cards(space, m.cards);
        OptimizerConfig ocfg;
        ocfg.seed = m.seed;
        ocfg.restarts = m.restarts > 0 ? m.restarts : cfg.value("restarts", 8);
        ocfg.max_evals = cfg.value("max_evals", 1500);
        if (m.tol > 0) ocfg.tolerance = m.tol;
        opt = detail::fmt(maximize(relay, space, ocfg).best_rate);
      }
      csv << detail::fmt(p) << "," << detail::fmt(q) << "," << detail::fmt(closed) << ","
          << detail::fmt(rep.rate) << "," << detail::fmt(rep.constraint_lhs) << ","
          << detail::fmt(rep.constraint_rhs) << "," << (rep.feasible ? "1" : "0") << "," << opt
          << "," << hash << "\n";
    }
  }
  out.csv = csv.str();
  out.report = "sweep: " + std::to_string(p_grid.size() * q_grid.size()) + " grid points";
  return out;
}

// classify: structure report for a channel spec.
inline RunResult run_classify(const RunManifest& m) {
  RunResult out;
  LoadedChannel lc = load_relay_channel_file(m.channel_path);
  std::ostringstream rep;
  const DegradedResult d = is_degraded(lc.relay);
  rep << "degraded=" << (d.degraded ? "yes" : "no") << " residual=" << detail::fmt(d.residual)
      << "\n";
  if (lc.relay.has_split()) {
    const OrcResult o = check_orc(lc.relay);
    rep << "orc=" << (o.orc ? "yes" : "no") << " distance=" << detail::fmt(o.distance) << "\n";
  } else {
    rep << "orc=not_testable (no B1/B2 split in the role map)\n";
  }
  const bool hadamard =
      d.degraded && lc.relay.relay_out_label().kind == LabelKind::classical;
  rep << "hadamard=" << (hadamard ? "yes" : "no") << "\n";
  rep << "classical_quantum=" << (lc.relay.tags.classical_quantum ? "yes" : "no") << "\n";
  out.report = rep.str();
  return out;
}

// simulate: packing-lemma codebook runs or gentle-measurement sampling.
inline RunResult run_simulate(const RunManifest& m) {
  RunResult out;
  const json cfg = load_json_file(m.config_path);
  const std::string task = cfg.value("task", "packing");
  std::ostringstream csv;
  const std::string hash = m.hash();
  if (task == "packing") {
    const LoadedChannel lc = load_relay_channel_file(m.channel_path);
    // classical-quantum table: outputs at the destination for each sender letter
    if (!lc.relay.tags.classical_quantum) {
      throw ValidationError("simulate packing: channel must be classical-quantum");
    }
    const auto sender = lc.relay.sender_labels();
    if (sender.size() != 1) {
      throw ValidationError("simulate packing: expected a single sender input");
    }
    std::vector<Matrix> letters;
    for (long x = 0; x < sender[0].dim; ++x) {
      const DensityOperator input = tensor(basis_state(sender[0], x),
                                           basis_state(lc.relay.relay_in_label(), 0));
      const DensityOperator outp = apply_channel(lc.relay.channel(), input);
      letters.push_back(partial_trace(outp, lc.relay.dest_names()).matrix());
    }
    const auto p_x = cfg.value("p_x", std::vector<double>(sender[0].dim,
                                                          1.0 / static_cast<double>(sender[0].dim)));
    const double delta = cfg.value("delta", 0.2);
    const int trials = cfg.value("trials", 20);
    csv << "seed,n,R,M,trial,error,eps,h,H,bound,manifest\n";
    for (const auto& point : cfg.at("points")) {
      const int n = point.at("n").get<int>();
      const double rate = point.at("rate").get<double>();
      const SimulationRecord rec =
          simulate_direct_code(letters, p_x, rate, n, delta, trials, m.seed);
      for (size_t t = 0; t < rec.errors.size(); ++t) {
        csv << m.seed << "," << n << "," << detail::fmt(rate) << "," << rec.codebook_size << ","
            << t << "," << detail::fmt(rec.errors[t]) << "," << detail::fmt(rec.eps) << ","
            << detail::fmt(rec.h_const) << "," << detail::fmt(rec.cap_h) << ","
            << detail::fmt(rec.bound) << "," << hash << "\n";
      }
    }
    out.report = "simulate packing: done";
  } else if (task == "gentle") {
    const int pairs = cfg.value("pairs", 200);
    const long dim = cfg.value("dim", 2L);
    const double min_success = cfg.value("min_success", 0.5);
    csv << "seed,index,success,distance,bound,holds,manifest\n";
    int produced = 0;
    uint64_t stream = 0;
    while (produced < pairs) {
      SplitMix64 rng(mix_seed(m.seed, stream++));
      Matrix g(dim, dim);
      for (long r = 0; r < dim; ++r) {
        for (long c = 0; c < dim; ++c) g(r, c) = rng.complex_gaussian();
      }
      Matrix rho = g * g.adjoint();
      rho /= rho.trace().real();
      Matrix h_raw(dim, dim);
      for (long r = 0; r < dim; ++r) {
        for (long c = 0; c < dim; ++c) h_raw(r, c) = rng.complex_gaussian();
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h_raw));
      Matrix lambda = Matrix::Zero(dim, dim);
      for (long i = 0; i < dim; ++i) {
        const double u = rng.uniform();
        lambda += u * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      }
      DensityOperator state({quantum_label("S", dim)}, hermitize(rho));
      const double succ = (lambda * state.matrix()).trace().real();
      if (succ < min_success) continue;
      const GentleResult res = gentle_measurement_check(state, lambda);
      csv << m.seed << "," << produced << "," << detail::fmt(res.success_prob) << ","
          << detail::fmt(res.trace_distance) << "," << detail::fmt(res.bound) << ","
          << (res.holds ? "1" : "0") << "," << hash << "\n";
      ++produced;
    }
    out.report = "simulate gentle: done";
  } else {
    throw ValidationError("unknown simulate task '" + task + "'");
  }
  out.csv = csv.str();
  return out;
}

// optimize: maximize a bound over a parameterized search space.
inline RunResult run_optimize(const RunManifest& m) {
  RunResult out;
  const LoadedChannel lc = load_relay_channel_file(m.channel_path);
  const json cfg = m.config_path.empty() ? json::object() : load_json_file(m.config_path);
  ParamSpace space = detail::space_from_config(cfg, lc);
  if (cfg.contains("cards")) {
    for (const auto& [k, v] : cfg.at("cards").items()) {
      detail::apply_cards(space, k + "=" + std::to_string(v.get<long>()));
    }
  }
  detail::apply_cards(space, m.cards);
  OptimizerConfig ocfg;
  ocfg.seed = m.seed;
  ocfg.restarts = m.restarts > 0 ? m.restarts : cfg.value("restarts", 8);
  ocfg.max_evals = cfg.value("max_evals", 1500);
  ocfg.penalty_weight = cfg.value("penalty_weight", 50.0);
  if (m.tol > 0) ocfg.tolerance = m.tol;
  const OptimizeResult res = maximize(lc.relay, space, ocfg);
  std::ostringstream csv;
  const std::string hash = m.hash();
  csv << "row,index,value,feasible,manifest\n";
  for (size_t r = 0; r < res.restart_best.size(); ++r) {
    csv << "restart," << r << "," << detail::fmt(res.restart_best[r]) << ",," << hash << "\n";
  }
  csv << "best,," << detail::fmt(res.best_rate) << "," << (res.best_report.feasible ? "1" : "0")
      << "," << hash << "\n";
  out.csv = csv.str();
  out.report = "optimize: best rate " + detail::fmt(res.best_rate);
  return out;
}

inline RunResult run_command(const RunManifest& m) {
  RunResult res;
  try {
    if (m.command == "eval") {
      res = run_eval(m);
    } else if (m.command == "sweep") {
      res = run_sweep(m);
    } else if (m.command == "classify") {
      res = run_classify(m);
    } else if (m.command == "simulate") {
      res = run_simulate(m);
    } else if (m.command == "optimize") {
      res = run_optimize(m);
    } else {
      res.report = "unknown command '" + m.command + "'";
      res.exit_code = 2;
      return res;
    }
  } catch (const FeasibilityError& e) {
    res.report = std::string("infeasible: ") + e.what();
    res.exit_code = 3;
    return res;
  } catch (const Error& e) {
    res.report = std::string("validation failure: ") + e.what();
    res.exit_code = 2;
    return res;
  }
  if (!m.out_path.empty() && !res.csv.empty()) {
    std::ofstream f(m.out_path, std::ios::binary);
    if (!f) {
      res.report = "cannot write output file " + m.out_path;
      res.exit_code = 2;
      return res;
    }
    f << res.csv;
  }
  return res;
}

}  // namespace qrelay
