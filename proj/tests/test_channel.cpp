#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/json_io.hpp"

using namespace qrelay;
using Catch::Approx;

namespace {

QuantumChannel depolarizing_qubit(double q, const std::string& in = "A",
                                  const std::string& out = "B") {
  std::vector<Matrix> kraus;
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  z << 1, 0, 0, -1;
  if (1.0 - 0.75 * q > 0) kraus.push_back(std::sqrt(1.0 - 0.75 * q) * Matrix::Identity(2, 2));
  if (q > 0) {
    kraus.push_back(std::sqrt(q / 4.0) * x);
    kraus.push_back(std::sqrt(q / 4.0) * y);
    kraus.push_back(std::sqrt(q / 4.0) * z);
  }
  return QuantumChannel({quantum_label(in, 2)}, {quantum_label(out, 2)}, std::move(kraus));
}

}  // namespace

TEST_CASE("channel validation rejects incomplete Kraus sets") {
  Matrix half = 0.5 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(QuantumChannel({quantum_label("A", 2)}, {quantum_label("B", 2)}, {half}),
                  ValidationError);
}

TEST_CASE("identity channel keeps the state") {
  SplitMix64 rng(3);
  const DensityOperator rho(std::vector<SubsystemLabel>{quantum_label("A", 3)},
                            testutil::random_density_matrix(3, rng));
  const QuantumChannel id = identity_channel({quantum_label("A", 3)}, {quantum_label("B", 3)});
  const DensityOperator out = apply_channel(id, rho);
  CHECK(out.labels()[0].name == "B");
  CHECK(max_abs(out.matrix() - rho.matrix()) < 1e-12);
}

TEST_CASE("depolarizing action on |0><0| (hand-expanded oracle)") {
  // (1-q) rho + q I/2 on |0><0| = diag(1 - q/2, q/2)
  const double q = 0.3;
  const DensityOperator in = basis_state(quantum_label("A", 2), 0);
  const DensityOperator out = apply_channel(depolarizing_qubit(q), in);
  CHECK(out.matrix()(0, 0).real() == Approx(1.0 - q / 2.0).margin(1e-12));
  CHECK(out.matrix()(1, 1).real() == Approx(q / 2.0).margin(1e-12));
  CHECK(std::abs(out.matrix()(0, 1)) < 1e-12);
}

TEST_CASE("apply_channel acts on a named factor and leaves the rest") {
  SplitMix64 rng(11);
  const DensityOperator a(std::vector<SubsystemLabel>{quantum_label("A", 2)},
                          testutil::random_density_matrix(2, rng));
  const DensityOperator c(std::vector<SubsystemLabel>{quantum_label("C", 2)},
                          testutil::random_density_matrix(2, rng));
  const DensityOperator ac = tensor(a, c);
  const DensityOperator out = apply_channel(depolarizing_qubit(1.0, "C", "B"), ac);
  // C fully depolarized, A untouched; output labels (A, B)
  CHECK(max_abs(partial_trace(out, {"A"}).matrix() - a.matrix()) < 1e-12);
  CHECK(max_abs(partial_trace(out, {"B"}).matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-12);
}

TEST_CASE("apply_channel validates dims and labels") {
  const DensityOperator rho = maximally_mixed({quantum_label("A", 3)});
  CHECK_THROWS_AS(apply_channel(depolarizing_qubit(0.1), rho), DimensionError);
  const DensityOperator rho2 = maximally_mixed({quantum_label("Z", 2)});
  CHECK_THROWS_AS(apply_channel(depolarizing_qubit(0.1), rho2), LabelError);
}

TEST_CASE("trace and positivity preserved on random channels and states") {
  SplitMix64 rng(2024);
  for (int it = 0; it < 500; ++it) {
    const long din = 2 + static_cast<long>(rng.next() % 2);   // 2..3
    const long dout = 2 + static_cast<long>(rng.next() % 2);  // 2..3
    const auto ch = testutil::random_channel({quantum_label("A", din)},
                                             {quantum_label("B", dout)}, 3, rng);
    const DensityOperator rho(std::vector<SubsystemLabel>{quantum_label("A", din)},
                              testutil::random_density_matrix(din, rng));
    const DensityOperator out = apply_channel(ch, rho);
    CHECK(std::abs(out.matrix().trace().real() - 1.0) < 1e-9);
    CHECK(hermitian_eigenvalues(out.matrix()).minCoeff() > -1e-8);
  }
}

TEST_CASE("choi of the identity is the maximally entangled state") {
  const QuantumChannel id = identity_channel({quantum_label("A", 2)}, {quantum_label("B", 2)});
  const DensityOperator choi = choi_state(id);
  CHECK(max_abs(choi.matrix() - testutil::bell_state("R_A", "B").matrix()) < 1e-12);
}

TEST_CASE("choi of the completely depolarizing qubit channel is I/4") {
  // brute force from the Kraus set {I/2, X/2, Y/2, Z/2}
  const DensityOperator choi = choi_state(depolarizing_qubit(1.0));
  CHECK(max_abs(choi.matrix() - Matrix::Identity(4, 4) / 4.0) < 1e-12);
}

TEST_CASE("choi of a composition matches applying the second channel to the first's choi") {
  SplitMix64 rng(55);
  for (int it = 0; it < 10; ++it) {
    const auto ch1 = testutil::random_channel({quantum_label("A", 2)}, {quantum_label("M", 2)},
                                              2, rng);
    const auto ch2 = testutil::random_channel({quantum_label("M", 2)}, {quantum_label("B", 2)},
                                              2, rng);
    const DensityOperator lhs = choi_state(compose(ch2, ch1));
    const DensityOperator rhs = apply_channel(ch2, choi_state(ch1));
    CHECK(max_abs(lhs.matrix() - rhs.matrix()) < 1e-9);
  }
}

TEST_CASE("kraus_from_choi reconstructs the channel action") {
  SplitMix64 rng(77);
  for (int it = 0; it < 10; ++it) {
    const auto ch = testutil::random_channel({quantum_label("A", 2)}, {quantum_label("B", 3)},
                                             2, rng);
    const auto rebuilt = kraus_from_choi(choi_state(ch), {quantum_label("A", 2)},
                                         {quantum_label("B", 3)});
    const DensityOperator rho(std::vector<SubsystemLabel>{quantum_label("A", 2)},
                              testutil::random_density_matrix(2, rng));
    CHECK(max_abs(apply_channel(ch, rho).matrix() - apply_channel(rebuilt, rho).matrix()) < 1e-9);
  }
}

TEST_CASE("classical factors stay diagonal under stochastic maps") {
  SplitMix64 rng(91);
  for (int it = 0; it < 20; ++it) {
    // random 3x3 stochastic matrix
    std::vector<std::vector<double>> rows(3, std::vector<double>(3));
    for (auto& row : rows) {
      double sum = 0.0;
      for (auto& v : row) {
        v = rng.uniform() + 1e-3;
        sum += v;
      }
      for (auto& v : row) v /= sum;
    }
    const auto ch = stochastic_channel(rows, classical_label("X", 3), classical_label("Y", 3));
    std::vector<double> dist = {0.2, 0.5, 0.3};
    const DensityOperator out = apply_channel(ch, embed_classical(dist, "X"));
    for (long r = 0; r < 3; ++r) {
      for (long c = 0; c < 3; ++c) {
        if (r != c) CHECK(std::abs(out.matrix()(r, c)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("measurement channel records Born probabilities") {
  SplitMix64 rng(13);
  const DensityOperator rho(std::vector<SubsystemLabel>{quantum_label("E", 2)},
                            testutil::random_density_matrix(2, rng));
  const POVM povm = testutil::random_projective_povm(2, rng);
  const DensityOperator out =
      apply_channel(measurement_channel(povm, quantum_label("E", 2), "Y1"), rho);
  REQUIRE(out.labels()[0].name == "Y1");
  REQUIRE(out.labels()[0].kind == LabelKind::classical);
  for (long y = 0; y < 2; ++y) {
    const double born = (povm.elements()[y] * rho.matrix()).trace().real();
    CHECK(out.matrix()(y, y).real() == Approx(born).margin(1e-12));
  }
}

TEST_CASE("channel spec JSON round trip and validator") {
  // bit-pipe measure-and-prepare channel written out by hand
  json j;
  j["inputs"] = {label_to_json(quantum_label("A", 2)), label_to_json(quantum_label("D", 1))};
  j["outputs"] = {label_to_json(quantum_label("B", 2)), label_to_json(classical_label("Y1", 2))};
  Matrix k0 = Matrix::Zero(4, 2), k1 = Matrix::Zero(4, 2);
  k0(0, 0) = 1.0;  // |0>_B |0>_Y1 <0|_A
  k1(3, 1) = 1.0;  // |1>_B |1>_Y1 <1|_A
  j["kraus"] = {matrix_to_json(k0), matrix_to_json(k1)};
  j["roles"] = {{"A", "sender_in"}, {"D", "relay_in"}, {"B", "dest_out"}, {"Y1", "relay_out"}};
  const LoadedChannel lc = load_relay_channel(j);
  CHECK(lc.relay.relay_out() == "Y1");
  CHECK(lc.relay.sender_names() == std::vector<std::string>{"A"});

  const json round = relay_channel_to_json(lc.relay);
  const LoadedChannel lc2 = load_relay_channel(round);
  CHECK(lc2.relay.channel().in_dim() == 2);

  // corrupt a Kraus operator: completeness residual must be reported
  j["kraus"][1] = matrix_to_json(0.5 * k1);
  try {
    load_relay_channel(j);
    FAIL("validator accepted a non-CPTP Kraus set");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}
