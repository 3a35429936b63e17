#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qrelay/optimizer.hpp"

using namespace qrelay;
using Catch::Approx;

namespace {

RelayChannel random_small_relay(SplitMix64& rng) {
  auto kraus = testutil::random_kraus(4, 4, 4, rng);
  QuantumChannel ch({quantum_label("A", 2), quantum_label("D", 2)},
                    {quantum_label("B", 2), quantum_label("E", 2)}, std::move(kraus));
  return RelayChannel(std::move(ch), "D", "E");
}

}  // namespace

TEST_CASE("parameterize: uniform pmf from a zero block") {
  const RelayChannel ch = make_bsc_cq(0.1);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 2;
  const size_t n = parameter_count(ch, space);
  REQUIRE(n == 2);  // classical inputs: only the pmf is free
  const BoundInput input = parameterize(ch, space, std::vector<double>(n, 0.0));
  const auto& ens = std::get<Ensemble>(input);
  REQUIRE(ens.pmf().size() == 2);  // joint over (U:1, X0:2, X1:1)
  CHECK(ens.pmf()[0] == Approx(0.5).margin(1e-15));
  CHECK(ens.pmf()[1] == Approx(0.5).margin(1e-15));
}

TEST_CASE("parameterize: pure state raw with a single live amplitude gives a basis state") {
  SplitMix64 rng(4);
  const RelayChannel ch = random_small_relay(rng);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 1;
  const size_t n = parameter_count(ch, space);
  std::vector<double> raw(n, 0.0);
  // layout: pmf(1), theta state (2*2 reals), zeta state (2*2 reals)
  raw[1] = 3.0;  // re of amplitude 0 of theta^0
  const BoundInput input = parameterize(ch, space, raw);
  const auto& ens = std::get<Ensemble>(input);
  const Matrix theta = ens.families()[0].states[0].matrix();
  CHECK(theta(0, 0).real() == Approx(1.0).margin(1e-12));
  CHECK(std::abs(theta(1, 1)) < 1e-12);
}

TEST_CASE("parameterize: measure-forward configs satisfy the type invariants") {
  SplitMix64 rng(11);
  const RelayChannel ch = make_depolarizing_relay(0.2, 0.4);
  ParamSpace space;
  space.target = OptTarget::measure_forward;
  space.card_x0 = 2;
  space.card_x1 = 2;
  space.card_y1 = 2;
  space.card_z1 = 2;
  const size_t n = parameter_count(ch, space);
  for (int it = 0; it < 25; ++it) {
    std::vector<double> raw(n);
    for (auto& v : raw) v = rng.gaussian();
    const BoundInput input = parameterize(ch, space, raw);
    const auto& cfg = std::get<MFConfig>(input);
    for (long r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (long z = 0; z < 2; ++z) sum += cfg.compressor[r * 2 + z];
      CHECK(sum == Approx(1.0).margin(1e-12));
    }
    CHECK_NOTHROW(eval_mf(ch, cfg));
  }
}

TEST_CASE("parameterize rejects wrong raw length") {
  const RelayChannel ch = make_bsc_cq(0.1);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  CHECK_THROWS_AS(parameterize(ch, space, std::vector<double>(1, 0.0)), DimensionError);
}

TEST_CASE("optimizer reaches the BSC capacity") {
  // oracle: exhaustive pmf grid at step 1e-3 over the classical joint
  for (const double flip : {0.1, 0.25}) {
    double oracle = 0.0;
    for (int g = 0; g <= 1000; ++g) {
      const double p = g / 1000.0;
      std::vector<std::vector<double>> joint = {{p * (1 - flip), p * flip},
                                                {(1 - p) * flip, (1 - p) * (1 - flip)}};
      oracle = std::max(oracle, testutil::oracle_mutual_information(joint));
    }
    const RelayChannel ch = make_bsc_cq(flip);
    ParamSpace space;
    space.target = OptTarget::direct_transmission;
    space.card_x0 = 2;
    OptimizerConfig cfg;
    cfg.restarts = 4;
    cfg.max_evals = 400;
    cfg.seed = 42;
    const OptimizeResult res = maximize(ch, space, cfg);
    CHECK(res.best_rate >= oracle - 1e-4);
    CHECK(res.best_rate <= oracle + 1e-9);
  }
}

TEST_CASE("measure-forward optimization approaches the closed form (smoke budget)") {
  const RelayChannel ch = make_depolarizing_relay(0.1, 0.3);
  ParamSpace space;
  space.target = OptTarget::measure_forward;
  space.card_x0 = 2;
  space.card_x1 = 2;
  space.card_z1 = 2;
  space.fixed_povm = computational_povm(2);
  OptimizerConfig cfg;
  cfg.restarts = 3;
  cfg.max_evals = 3000;
  cfg.seed = 42;
  cfg.penalty_weight = 25.0;
  const OptimizeResult res = maximize(ch, space, cfg);
  // the full-budget run is exercised by the acceptance suite; this guards
  // against regressions at a fraction of the cost
  CHECK(res.best_rate >= eval_depolarizing_closed_form(0.1, 0.3) - 5e-3);
  CHECK(res.best_report.feasible);
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
  const RelayChannel ch = make_bsc_cq(0.2);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 2;
  OptimizerConfig cfg;
  cfg.restarts = 3;
  cfg.max_evals = 200;
  cfg.seed = 7;
  const OptimizeResult a = maximize(ch, space, cfg);
  const OptimizeResult b = maximize(ch, space, cfg);
  CHECK(a.best_rate == b.best_rate);
  CHECK(a.evaluations == b.evaluations);
  REQUIRE(a.restart_best.size() == b.restart_best.size());
  for (size_t i = 0; i < a.restart_best.size(); ++i) {
    CHECK(a.restart_best[i] == b.restart_best[i]);
  }
}

TEST_CASE("doubling the restarts never hurts") {
  SplitMix64 rng(31);
  const RelayChannel ch = random_small_relay(rng);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 2;
  OptimizerConfig cfg;
  cfg.max_evals = 250;
  cfg.seed = 5;
  cfg.restarts = 2;
  const double best2 = maximize(ch, space, cfg).best_rate;
  cfg.restarts = 4;
  const double best4 = maximize(ch, space, cfg).best_rate;
  CHECK(best4 >= best2);
}

TEST_CASE("reported best re-evaluates to the reported rate") {
  const RelayChannel ch = make_bsc_cq(0.15);
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 2;
  OptimizerConfig cfg;
  cfg.restarts = 2;
  cfg.max_evals = 200;
  cfg.seed = 3;
  const OptimizeResult res = maximize(ch, space, cfg);
  CHECK(res.best_report.rate == Approx(res.best_rate).margin(1e-9));
  const BoundReport again = evaluate_bound(ch, space, parameterize(ch, space, res.best_raw));
  CHECK(again.rate == res.best_rate);
}

TEST_CASE("enlarging the relay-decoded alphabet never loses rate") {
  SplitMix64 rng(777);
  for (int it = 0; it < 10; ++it) {
    const RelayChannel ch = random_small_relay(rng);
    OptimizerConfig cfg;
    cfg.restarts = 3;
    cfg.max_evals = 700;
    cfg.seed = 100 + it;
    ParamSpace small;
    small.target = OptTarget::partial_decode_forward;
    small.card_u = 1;
    small.card_x0 = 2;
    small.card_x1 = 2;
    ParamSpace large = small;
    large.card_u = 2;
    const double rate_small = maximize(ch, small, cfg).best_rate;
    const double rate_large = maximize(ch, large, cfg).best_rate;
    CHECK(rate_large >= rate_small - 1e-6);
  }
}

TEST_CASE("constant-output channel optimizes to zero") {
  std::vector<Matrix> kraus;
  for (long b = 0; b < 2; ++b) {
    for (long e = 0; e < 2; ++e) {
      for (long i = 0; i < 4; ++i) {
        Matrix k = Matrix::Zero(4, 4);
        k(b * 2 + e, i) = 0.5;
        kraus.push_back(std::move(k));
      }
    }
  }
  QuantumChannel ch({quantum_label("A", 2), quantum_label("D", 2)},
                    {quantum_label("B", 2), quantum_label("E", 2)}, std::move(kraus));
  const RelayChannel relay(std::move(ch), "D", "E");
  ParamSpace space;
  space.target = OptTarget::direct_transmission;
  space.card_x0 = 2;
  OptimizerConfig cfg;
  cfg.restarts = 2;
  cfg.max_evals = 200;
  cfg.seed = 9;
  CHECK(maximize(relay, space, cfg).best_rate <= 1e-6);
}
