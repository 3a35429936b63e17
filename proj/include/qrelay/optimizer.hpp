#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "qrelay/bounds.hpp"
#include "qrelay/common.hpp"
#include "qrelay/relay.hpp"

namespace qrelay {

enum class StateKind { pure, mixed };

enum class OptTarget {
  direct_transmission,   // PD-F with U, X1 trivial
  partial_decode_forward,
  full_decode_forward,
  measure_forward,
  assist_forward
};

// Cardinalities and auxiliary dimensions of the search space. The paper's
// bounds come with no cardinality guarantees, so these are explicit user
// choices (default 2, a heuristic floor).
struct ParamSpace {
  OptTarget target = OptTarget::direct_transmission;
  long card_u = 1;
  long card_x0 = 2;
  long card_x1 = 1;
  long card_x2 = 1;
  long card_y1 = 2;
  long card_z1 = 2;
  long dim_g0 = 1;
  long dim_g1 = 1;
  long dim_g2 = 1;
  StateKind state_kind = StateKind::pure;
  std::optional<POVM> fixed_povm;  // measure-forward: pin the relay POVM
};

struct OptimizerConfig {
  int restarts = 8;
  int max_evals = 1500;  // objective evaluations per restart
  uint64_t seed = 1;
  double penalty_weight = 50.0;  // exact penalty on the MF constraint
  double tolerance = 1e-10;      // simplex convergence threshold
};

using BoundInput = std::variant<Ensemble, MFConfig, AFConfig>;

namespace detail {

// Sequential reader turning a raw real vector into normalized objects.
class ParamCursor {
 public:
  ParamCursor(const std::vector<double>* raw) : raw_(raw) {}

  size_t consumed() const { return pos_; }
  const std::vector<std::pair<size_t, size_t>>& spans() const { return spans_; }

  std::vector<double> pmf(long n) {
    std::vector<double> out(n, 1.0 / static_cast<double>(n));
    const double* r = take(n);
    if (!r) return out;
    double mx = r[0];
    for (long i = 1; i < n; ++i) mx = std::max(mx, r[i]);
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      out[i] = std::exp(r[i] - mx);
      sum += out[i];
    }
    for (long i = 0; i < n; ++i) out[i] /= sum;
    return out;
  }

  Matrix pure_state(long d) {
    const double* r = take(2 * d);
    CVector v = CVector::Zero(d);
    if (r) {
      for (long i = 0; i < d; ++i) v(i) = Complex(r[2 * i], r[2 * i + 1]);
    }
    const double norm = v.norm();
    if (norm < 1e-12) {
      v.setZero();
      v(0) = 1.0;
    } else {
      v /= norm;
    }
    return v * v.adjoint();
  }

  Matrix mixed_state(long d) {
    const double* r = take(2 * d * d);
    Matrix g = Matrix::Identity(d, d);
    if (r) {
      for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) {
          g(i, j) = Complex(r[2 * (i * d + j)], r[2 * (i * d + j) + 1]);
        }
      }
    }
    Matrix rho = g * g.adjoint();
    rho.diagonal().array() += Complex(1e-12, 0.0);
    rho /= rho.trace().real();
    return hermitize(rho);
  }

  Matrix state(long d, StateKind kind) {
    return kind == StateKind::pure ? pure_state(d) : mixed_state(d);
  }

  // Gram blocks whitened so the elements sum to the identity exactly.
  POVM povm(long d, long outcomes) {
    std::vector<Matrix> grams;
    Matrix s = Matrix::Zero(d, d);
    for (long y = 0; y < outcomes; ++y) {
      const double* r = take(2 * d * d);
      Matrix g = Matrix::Zero(d, d);
      if (r) {
        for (long i = 0; i < d; ++i) {
          for (long j = 0; j < d; ++j) {
            g(i, j) = Complex(r[2 * (i * d + j)], r[2 * (i * d + j) + 1]);
          }
        }
      } else {
        g = Matrix::Identity(d, d) / std::sqrt(static_cast<double>(outcomes));
      }
      Matrix m = g * g.adjoint();
      m.diagonal().array() += Complex(1e-9, 0.0);
      s += m;
      grams.push_back(std::move(m));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(s));
    Matrix sinv = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i) {
      sinv += (1.0 / std::sqrt(es.eigenvalues()(i))) * es.eigenvectors().col(i) *
              es.eigenvectors().col(i).adjoint();
    }
    std::vector<Matrix> els;
    for (auto& m : grams) els.push_back(hermitize(sinv * m * sinv));
    // absorb rounding into the last element
    Matrix acc = Matrix::Zero(d, d);
    for (size_t y = 0; y + 1 < els.size(); ++y) acc += els[y];
    els.back() = hermitize(Matrix::Identity(d, d) - acc);
    return POVM(std::move(els));
  }

  std::vector<double> rows(long nrows, long ncols) {
    std::vector<double> out;
    out.reserve(nrows * ncols);
    for (long i = 0; i < nrows; ++i) {
      const auto row = pmf(ncols);
      out.insert(out.end(), row.begin(), row.end());
    }
    return out;
  }

 private:
  const double* take(size_t n) {
    const size_t at = pos_;
    pos_ += n;
    if (n > 0) spans_.emplace_back(at, n);
    if (!raw_) return nullptr;
    if (raw_->size() < pos_) {
      throw DimensionError("parameterize: raw vector too short");
    }
    return raw_->data() + at;
  }

  const std::vector<double>* raw_;
  size_t pos_ = 0;
  std::vector<std::pair<size_t, size_t>> spans_;
};

// Builds a state family for one variable. Classical channel inputs admit only
// computational-basis inputs, so those families are fixed and consume no
// parameters.
inline StateFamily family_for(ParamCursor& cur, const std::string& var, long card,
                              const std::vector<SubsystemLabel>& labels, StateKind kind) {
  const long d = total_dim(labels);
  bool all_classical = true;
  for (const auto& l : labels) all_classical = all_classical && l.kind == LabelKind::classical;
  StateFamily fam{var, {}};
  if (all_classical) {
    if (card > d) {
      throw DimensionError("parameterize: cardinality of '" + var +
                           "' exceeds the classical input alphabet");
    }
    for (long k = 0; k < card; ++k) {
      Matrix m = Matrix::Zero(d, d);
      m(k, k) = 1.0;
      fam.states.emplace_back(labels, std::move(m));
    }
    return fam;
  }
  for (long k = 0; k < card; ++k) {
    fam.states.emplace_back(labels, cur.state(d, kind));
  }
  return fam;
}

inline BoundInput build_input(const RelayChannel& ch, const ParamSpace& space,
                              const std::vector<double>* raw, size_t* count,
                              std::vector<std::pair<size_t, size_t>>* spans = nullptr) {
  ParamCursor cur(raw);
  const auto sender = ch.sender_labels();
  const std::vector<SubsystemLabel> relay_in = {ch.relay_in_label()};
  BoundInput result = Ensemble({{"X0", 1}}, {1.0}, {});
  switch (space.target) {
    case OptTarget::direct_transmission:
    case OptTarget::partial_decode_forward: {
      const long cu = space.target == OptTarget::direct_transmission ? 1 : space.card_u;
      const long cx1 = space.target == OptTarget::direct_transmission ? 1 : space.card_x1;
      auto pmf = cur.pmf(cu * space.card_x0 * cx1);
      auto f0 = family_for(cur, "X0", space.card_x0, sender, space.state_kind);
      auto f1 = family_for(cur, "X1", cx1, relay_in, space.state_kind);
      result = Ensemble({{"U", cu}, {"X0", space.card_x0}, {"X1", cx1}}, std::move(pmf),
                        {std::move(f0), std::move(f1)});
      break;
    }
    case OptTarget::full_decode_forward: {
      auto pmf = cur.pmf(space.card_x0 * space.card_x1);
      auto f0 = family_for(cur, "X0", space.card_x0, sender, space.state_kind);
      auto f1 = family_for(cur, "X1", space.card_x1, relay_in, space.state_kind);
      result = Ensemble({{"X0", space.card_x0}, {"X1", space.card_x1}}, std::move(pmf),
                        {std::move(f0), std::move(f1)});
      break;
    }
    case OptTarget::measure_forward: {
      auto p0 = cur.pmf(space.card_x0);
      auto f0 = family_for(cur, "X0", space.card_x0, sender, space.state_kind);
      auto p1 = cur.pmf(space.card_x1);
      auto f1 = family_for(cur, "X1", space.card_x1, relay_in, space.state_kind);
      POVM povm = space.fixed_povm ? *space.fixed_povm
                                   : cur.povm(ch.relay_out_label().dim, space.card_y1);
      auto table = cur.rows(space.card_x1 * static_cast<long>(povm.size()), space.card_z1);
      MFConfig cfg{Ensemble({{"X0", space.card_x0}}, std::move(p0), {std::move(f0)}),
                   Ensemble({{"X1", space.card_x1}}, std::move(p1), {std::move(f1)}),
                   std::move(povm), space.card_z1, std::move(table)};
      result = std::move(cfg);
      break;
    }
    case OptTarget::assist_forward: {
      std::vector<SubsystemLabel> broadcast_labels = {quantum_label("G0", space.dim_g0),
                                                      quantum_label("G1", space.dim_g1)};
      broadcast_labels.insert(broadcast_labels.end(), sender.begin(), sender.end());
      std::vector<SubsystemLabel> direct_labels = {quantum_label("G2", space.dim_g2),
                                                   ch.relay_in_label()};
      auto p1 = cur.pmf(space.card_x1);
      StateFamily f1{"X1", {}};
      for (long k = 0; k < space.card_x1; ++k) {
        f1.states.emplace_back(broadcast_labels, cur.pure_state(total_dim(broadcast_labels)));
      }
      auto p2 = cur.pmf(space.card_x2);
      StateFamily f2{"X2", {}};
      for (long k = 0; k < space.card_x2; ++k) {
        f2.states.emplace_back(direct_labels, cur.pure_state(total_dim(direct_labels)));
      }
      AFConfig cfg{Ensemble({{"X1", space.card_x1}}, std::move(p1), {std::move(f1)}),
                   Ensemble({{"X2", space.card_x2}}, std::move(p2), {std::move(f2)})};
      result = std::move(cfg);
      break;
    }
  }
  if (count) *count = cur.consumed();
  if (spans) *spans = cur.spans();
  return result;
}

}  // namespace detail

inline size_t parameter_count(const RelayChannel& ch, const ParamSpace& space) {
  size_t n = 0;
  detail::build_input(ch, space, nullptr, &n);
  return n;
}

// Normalizes a raw real vector into a concrete evaluator input: pmfs through
// softmax blocks, pure states through normalized complex vectors, mixed
// states and POVMs through Gram constructions, classical channels through
// row-wise softmax. The output always satisfies the type invariants.
inline BoundInput parameterize(const RelayChannel& ch, const ParamSpace& space,
                               const std::vector<double>& raw) {
  size_t n = 0;
  BoundInput out = detail::build_input(ch, space, &raw, &n);
  if (raw.size() != n) {
    throw DimensionError("parameterize: expected " + std::to_string(n) + " parameters, got " +
                         std::to_string(raw.size()));
  }
  return out;
}

inline BoundReport evaluate_bound(const RelayChannel& ch, const ParamSpace& space,
                                  const BoundInput& input) {
  switch (space.target) {
    case OptTarget::direct_transmission:
    case OptTarget::partial_decode_forward:
      return eval_pdf(ch, std::get<Ensemble>(input));
    case OptTarget::full_decode_forward:
      return eval_full_df(ch, std::get<Ensemble>(input));
    case OptTarget::measure_forward:
      return eval_mf(ch, std::get<MFConfig>(input));
    case OptTarget::assist_forward:
      return eval_af(ch, std::get<AFConfig>(input));
  }
  throw ValidationError("evaluate_bound: unknown target");
}

struct OptimizeResult {
  double best_rate = 0.0;
  std::vector<double> best_raw;
  BoundReport best_report;
  std::vector<double> restart_best;  // best feasible rate seen per restart
  size_t evaluations = 0;
};

namespace detail {

// Nelder-Mead downhill simplex (minimization) with the dimension-adaptive
// coefficients of Gao and Han. Deterministic: the evaluation sequence depends
// only on the start point and budget.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double step, int max_evals,
                                       double tol) {
  const size_t n = x0.size();
  if (n == 0 || max_evals <= 0) {
    if (max_evals > 0) f(x0);
    return x0;
  }
  const double nd = static_cast<double>(n);
  const double expand = 1.0 + 2.0 / nd;
  const double contract = 0.75 - 1.0 / (2.0 * nd);
  const double shrink = 1.0 - 1.0 / nd;
  struct Vertex {
    std::vector<double> x;
    double v;
  };
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  std::vector<Vertex> simplex;
  simplex.push_back({x0, eval(x0)});
  for (size_t i = 0; i < n && evals < max_evals; ++i) {
    auto x = x0;
    x[i] += step;
    simplex.push_back({x, eval(x)});
  }
  auto order = [&]() {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
  };
  order();
  while (evals < max_evals && simplex.size() == n + 1) {
    double spread = 0.0;
    for (const auto& vert : simplex) spread = std::max(spread, std::abs(vert.v - simplex[0].v));
    if (spread < tol) break;
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k];
    }
    for (size_t k = 0; k < n; ++k) centroid[k] /= nd;
    auto blend = [&](double coeff) {
      std::vector<double> x(n);
      for (size_t k = 0; k < n; ++k) {
        x[k] = centroid[k] + coeff * (centroid[k] - simplex[n].x[k]);
      }
      return x;
    };
    auto reflected = blend(1.0);
    const double fr = eval(reflected);
    if (fr < simplex[0].v) {
      auto expanded = blend(expand);
      const double fe = eval(expanded);
      simplex[n] = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
    } else if (fr < simplex[n - 1].v) {
      simplex[n] = {reflected, fr};
    } else {
      const bool outside = fr < simplex[n].v;
      auto contracted = blend(outside ? contract : -contract);
      const double fc = eval(contracted);
      if (fc < (outside ? fr : simplex[n].v)) {
        simplex[n] = {contracted, fc};
      } else {
        for (size_t i = 1; i <= n && evals < max_evals; ++i) {
          for (size_t k = 0; k < n; ++k) {
            simplex[i].x[k] = simplex[0].x[k] + shrink * (simplex[i].x[k] - simplex[0].x[k]);
          }
          simplex[i].v = eval(simplex[i].x);
        }
      }
    }
    order();
  }
  return simplex[0].x;
}

// Runs the simplex on one contiguous parameter block, all other coordinates
// held fixed.
inline std::vector<double> nelder_mead_block(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    size_t offset, size_t len, double step, int max_evals, double tol) {
  auto sub_f = [&](const std::vector<double>& sub) {
    std::vector<double> full = x;
    for (size_t k = 0; k < len; ++k) full[offset + k] = sub[k];
    return f(full);
  };
  std::vector<double> sub(x.begin() + offset, x.begin() + offset + len);
  const std::vector<double> best = nelder_mead(sub_f, std::move(sub), step, max_evals, tol);
  for (size_t k = 0; k < len; ++k) x[offset + k] = best[k];
  return x;
}

// Golden-section minimization of f along x + t d for t in [-scale, scale].
// Returns the improved point and its value.
inline std::pair<std::vector<double>, double> line_minimize(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    double fx, const std::vector<double>& d, double scale, int iters) {
  auto at = [&](double t) {
    std::vector<double> y = x;
    for (size_t k = 0; k < y.size(); ++k) y[k] += t * d[k];
    return y;
  };
  const double gr = 0.6180339887498949;
  double a = -scale, b = scale;
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = f(at(c1)), f2 = f(at(c2));
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = f(at(c1));
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = f(at(c2));
    }
  }
  const double tb = f1 <= f2 ? c1 : c2;
  const double fb = std::min(f1, f2);
  if (fb < fx) return {at(tb), fb};
  return {x, fx};
}

// Powell-style direction-set polish: cycles of line minimizations along an
// adaptive direction set; after each cycle the net displacement replaces the
// direction of largest decrease, which follows curved ridges that stall a
// simplex or coordinate descent.
inline std::vector<double> powell_polish(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double scale, int max_evals, double tol) {
  const size_t n = x.size();
  if (n == 0 || max_evals <= 0) return x;
  std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;
  const int line_iters = 14;
  int evals = 0;
  auto counted = [&](const std::vector<double>& y) {
    ++evals;
    return f(y);
  };
  double fx = counted(x);
  while (evals + static_cast<int>(n) * (line_iters + 2) <= max_evals) {
    const std::vector<double> x_start = x;
    const double f_start = fx;
    size_t biggest = 0;
    double biggest_drop = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double before = fx;
      auto [xn, fn] = line_minimize(counted, x, fx, dirs[i], scale, line_iters);
      x = std::move(xn);
      fx = fn;
      if (before - fx > biggest_drop) {
        biggest_drop = before - fx;
        biggest = i;
      }
    }
    std::vector<double> net(n);
    double norm = 0.0;
    for (size_t k = 0; k < n; ++k) {
      net[k] = x[k] - x_start[k];
      norm += net[k] * net[k];
    }
    norm = std::sqrt(norm);
    if (norm > 1e-14) {
      for (auto& v : net) v /= norm;
      auto [xn, fn] = line_minimize(counted, x, fx, net, 2.0 * scale, line_iters);
      x = std::move(xn);
      fx = fn;
      dirs[biggest] = std::move(net);
    }
    if (f_start - fx < tol) break;
    scale = std::max(0.3 * scale, 1e-6);
  }
  return x;
}

}  // namespace detail

// Maximizes the selected bound over the parameter space with seeded random
// restarts of a Nelder-Mead search. Each restart explores the full space,
// then alternates multiplier updates on the measure-forward constraint with
// per-block simplex polish (the augmented objective is smooth at the active
// constraint, which the plain exact penalty is not), and finally bisects back
// onto the feasible side. The reported best is always a configuration that
// evaluated as feasible; an exact-penalty term guards the exploration phase.
inline OptimizeResult maximize(const RelayChannel& ch, const ParamSpace& space,
                               const OptimizerConfig& cfg) {
  if (cfg.restarts < 1) throw ValidationError("maximize: restarts must be >= 1");
  size_t n = 0;
  std::vector<std::pair<size_t, size_t>> spans;
  detail::build_input(ch, space, nullptr, &n, &spans);
  const bool constrained = space.target == OptTarget::measure_forward;

  OptimizeResult result;
  double global_best = -std::numeric_limits<double>::infinity();
  size_t total_evals = 0;

  for (int r = 0; r < cfg.restarts; ++r) {
    double restart_best = -std::numeric_limits<double>::infinity();
    std::vector<double> restart_best_raw;
    double push_rate = -std::numeric_limits<double>::infinity();
    std::vector<double> push_raw;  // infeasible incumbent worth projecting back
    double lambda = 0.0;
    const double mu = cfg.penalty_weight;
    double last_c = 0.0;  // signed constraint value at the latest evaluation

    auto objective = [&](const std::vector<double>& raw) {
      ++total_evals;
      double rate;
      double c;  // constraint_lhs - constraint_rhs (feasible iff <= ~0)
      bool feasible;
      try {
        const BoundReport rep = evaluate_bound(ch, space, parameterize(ch, space, raw));
        rate = rep.rate;
        feasible = rep.feasible;
        c = constrained ? rep.constraint_lhs - rep.constraint_rhs : 0.0;
      } catch (const Error&) {
        return 1e9;  // numerically inadmissible point
      }
      if (feasible) {
        if (rate > restart_best) {
          restart_best = rate;
          restart_best_raw = raw;
        }
        if (rate > global_best) {
          global_best = rate;
          result.best_raw = raw;
        }
      } else if (c < 0.1 && rate > push_rate) {
        push_rate = rate;
        push_raw = raw;
      }
      last_c = c;
      // augmented Lagrangian (smooth across the constraint boundary); the
      // quadratic term doubles as the exploration penalty
      const double shifted = std::max(0.0, lambda / mu + c);
      const double value = rate - 0.5 * mu * shifted * shifted;
      return -value;
    };

    SplitMix64 rng(mix_seed(cfg.seed, static_cast<uint64_t>(r)));
    std::vector<double> x0(n);
    for (auto& v : x0) v = rng.gaussian();
    const int explore = (3 * cfg.max_evals) / 10;
    auto x = detail::nelder_mead(objective, std::move(x0), 0.7, explore, cfg.tolerance);
    const int rounds = 8;
    const int per_round = (7 * cfg.max_evals) / (10 * rounds);
    double scale = 0.15;
    for (int round = 0; round < rounds; ++round) {
      if (constrained) {
        objective(x);  // refresh the incumbent's constraint value
        lambda = std::max(0.0, lambda + mu * last_c);
      }
      x = detail::powell_polish(objective, std::move(x), scale, per_round, 1e-12);
      scale = std::max(0.5 * scale, 2e-3);
    }

    // project the best infeasible incumbent back across the boundary
    if (constrained && !push_raw.empty() && !restart_best_raw.empty() &&
        push_rate > restart_best) {
      double lo = 0.0, hi = 1.0;
      const std::vector<double> anchor = restart_best_raw;
      for (int it = 0; it < 40; ++it) {
        const double t = 0.5 * (lo + hi);
        std::vector<double> mid(n);
        for (size_t k = 0; k < n; ++k) mid[k] = anchor[k] + t * (push_raw[k] - anchor[k]);
        double c_mid = 1.0;
        try {
          const BoundReport rep = evaluate_bound(ch, space, parameterize(ch, space, mid));
          ++total_evals;
          c_mid = rep.constraint_lhs - rep.constraint_rhs;
          if (rep.feasible) {
            if (rep.rate > restart_best) restart_best = rep.rate;
            if (rep.rate > global_best) {
              global_best = rep.rate;
              result.best_raw = mid;
            }
          }
        } catch (const Error&) {
          c_mid = 1.0;
        }
        if (c_mid <= 0.0) {
          lo = t;
        } else {
          hi = t;
        }
      }
    }
    result.restart_best.push_back(restart_best);
  }
  result.evaluations = total_evals;
  if (!std::isfinite(global_best)) {
    throw FeasibilityError("maximize: no feasible configuration found");
  }
  result.best_rate = global_best;
  result.best_report =
      evaluate_bound(ch, space, parameterize(ch, space, result.best_raw));
  return result;
}

}  // namespace qrelay
