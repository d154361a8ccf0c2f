#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "htqft/circuit.hpp"
#include "oracle.hpp"

using namespace htqft;

namespace {
const ModelParams headline = ModelParams::from_ratios(0.2, 8.0);

std::vector<PauliTerm> headline_terms(int n_q) {
  return decompose(assemble(enumerate_for_qubits(headline, n_q, Sector::even), headline));
}

std::vector<PauliTerm> random_terms(int n_q, std::mt19937_64& rng) {
  return decompose(oracle::random_hermitian(1 << n_q, rng));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

StateVector random_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd a(dim);
  for (int i = 0; i < dim; ++i) a(i) = complex(nd(rng), nd(rng));
  return StateVector(a / a.norm());
}
}  // namespace

TEST(PauliExp, ZWord) {
  const auto p = pauli_exp_circuit("Z", 0.35);
  ASSERT_EQ(p.gates.size(), 1u);
  EXPECT_EQ(p.gates[0], GateOp::rz(0, 0.7));
}

TEST(PauliExp, ZZWord) {
  const auto p = pauli_exp_circuit("ZZ", 0.1);
  const std::vector<GateOp> expected{GateOp::cx(0, 1), GateOp::rz(1, 0.2), GateOp::cx(0, 1)};
  EXPECT_EQ(p.gates, expected);
}

TEST(PauliExp, XAndYBasisChanges) {
  const std::vector<GateOp> x{GateOp::h(0), GateOp::rz(0, 1.0), GateOp::h(0)};
  EXPECT_EQ(pauli_exp_circuit("X", 0.5).gates, x);
  const double hp = std::numbers::pi / 2.0;
  const std::vector<GateOp> y{GateOp::rx(1, hp), GateOp::rz(1, 1.0), GateOp::rx(1, -hp)};
  EXPECT_EQ(pauli_exp_circuit("IY", 0.5).gates, y);
}

TEST(PauliExp, IdentityIsPhaseOnly) {
  const auto p = pauli_exp_circuit("III", 0.4);
  EXPECT_TRUE(p.gates.empty());
  EXPECT_EQ(p.global_phase, 0.4);
  EXPECT_THROW(pauli_exp_circuit("XA", 0.1), std::invalid_argument);
}

TEST(PauliExp, MatchesExponentialForEveryWord) {
  std::mt19937_64 rng(41);
  for (int n_q = 1; n_q <= 3; ++n_q)
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << (2 * n_q)); ++w) {
      const std::string word = word_from_index(w, n_q);
      const StateVector psi0 = random_state(1 << n_q, rng);
      const auto p = pauli_exp_circuit(word, 0.61);
      StateVector psi = psi0;
      simulate_gates(p.gates, psi);
      psi.amps() *= std::polar(1.0, -p.global_phase);
      const Eigen::VectorXcd ref = oracle::expm_hermitian(oracle::pauli_matrix(word), 0.61) * psi0.amps();
      EXPECT_LE((psi.amps() - ref).norm(), 1e-13) << word;
    }
}

TEST(Circuit, StepMatchesTrotterStepper) {
  std::mt19937_64 rng(43);
  for (int n_q = 1; n_q <= 4; ++n_q) {
    const auto terms = n_q <= 3 ? headline_terms(n_q) : random_terms(n_q, rng);
    const TrotterCircuit c = build_trotter_circuit(terms, 0.3, 1);
    const TrotterStepper stepper(terms, 0.3);
    StateVector a = random_state(1 << n_q, rng), b = a;
    for (int k = 0; k < 10; ++k) {
      simulate_step(c, a);
      stepper.step(b);
    }
    EXPECT_LE((a.amps() - b.amps()).norm(), 1e-12) << n_q;
  }
}

TEST(Circuit, EightyStepsOfHeadlineCircuit) {
  const auto terms = headline_terms(2);
  const TrotterCircuit c = build_trotter_circuit(terms, 0.3, 80);
  const TrotterStepper stepper(terms, 0.3);
  StateVector a = StateVector::basis_state(4, 0), b = a;
  for (int k = 0; k < 80; ++k) {
    simulate_step(c, a);
    stepper.step(b);
    EXPECT_GE(fidelity(a, b), 1.0 - 1e-10);
    EXPECT_NEAR(a.norm(), 1.0, 1e-10);
  }
}

TEST(Circuit, ResourceCounts) {
  std::mt19937_64 rng(47);
  const auto terms = random_terms(3, rng);
  const TrotterCircuit c = build_trotter_circuit(terms, 0.1, 7);
  std::size_t cx = 0, rz = 0;
  for (const auto& t : terms) {
    const auto active = static_cast<std::size_t>(std::count_if(t.word.begin(), t.word.end(), [](char l) { return l != 'I'; }));
    if (active == 0) continue;
    cx += 2 * (active - 1);
    ++rz;
  }
  EXPECT_EQ(c.two_qubit_gates, cx);
  EXPECT_EQ(c.rotations, rz);
  EXPECT_EQ(c.term_count, terms.size());
  EXPECT_EQ(c.steps, 7);
  EXPECT_EQ(resource_json(c), "{\"n_q\":3,\"terms\":" + std::to_string(terms.size()) +
                                  ",\"two_qubit_gates\":" + std::to_string(cx) + ",\"rotations\":" + std::to_string(rz) +
                                  ",\"steps\":7,\"depth\":" + std::to_string(c.depth) + ",\"dt\":0.1}\n");
}

TEST(Circuit, Depth) {
  EXPECT_EQ(circuit_depth({GateOp::h(0), GateOp::h(1), GateOp::cx(0, 1), GateOp::rz(1, 1.0)}, 2), 3u);
  EXPECT_EQ(circuit_depth({}, 3), 0u);
}

TEST(Qasm, GoldenHeadlineCircuit) {
  std::ifstream in(std::string(HTQFT_GOLDEN_DIR) + "/trotter_nq2_dt0.3.qasm");
  ASSERT_TRUE(in.good());
  std::stringstream golden;
  golden << in.rdbuf();
  const auto want = lines_of(golden.str());
  const auto got = lines_of(emit_qasm(build_trotter_circuit(headline_terms(2), 0.3, 1)));
  ASSERT_EQ(got.size(), want.size());
  const std::regex angle(R"(^(r[xz])\(([^)]*)\) (q\[\d+\];)$)");
  for (std::size_t i = 0; i < want.size(); ++i) {
    std::smatch gm, wm;
    if (std::regex_match(want[i], wm, angle) && wm[2].str().find("pi") == std::string::npos) {
      ASSERT_TRUE(std::regex_match(got[i], gm, angle)) << got[i];
      EXPECT_EQ(gm[1].str(), wm[1].str());
      EXPECT_EQ(gm[3].str(), wm[3].str());
      EXPECT_NEAR(parse_double(gm[2].str()), parse_double(wm[2].str()), 1e-12) << i;
    } else if (want[i].starts_with("// trotter")) {
      EXPECT_TRUE(got[i].starts_with("// trotter n_q=2 terms=10 dt=0.3 steps=1")) << got[i];
    } else {
      EXPECT_EQ(got[i], want[i]) << i;
    }
  }
}

TEST(Qasm, Structure) {
  const std::string q = emit_qasm(build_trotter_circuit({{"ZZ", {0.25, 0.0}}}, 2.0, 2));
  const std::string expected =
      "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n// trotter n_q=2 terms=1 dt=2 steps=2 global_phase_per_step=0\n"
      "qreg q[2];\ncreg c[2];\n"
      "cx q[0],q[1];\nrz(1.0) q[1];\ncx q[0],q[1];\n"
      "cx q[0],q[1];\nrz(1.0) q[1];\ncx q[0],q[1];\n"
      "measure q[0] -> c[0];\nmeasure q[1] -> c[1];\n";
  EXPECT_EQ(q, expected);
}

TEST(Qasm, EmptyCircuitOnlyMeasures) {
  const std::string q = emit_qasm(empty_circuit(2, 0.1, 3));
  EXPECT_NE(q.find("qreg q[2];"), std::string::npos);
  EXPECT_EQ(q.find("rz("), std::string::npos);
  EXPECT_NE(q.find("measure q[1] -> c[1];"), std::string::npos);
  EXPECT_THROW(build_trotter_circuit({}, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(build_trotter_circuit({{"Z", {1.0, 0.0}}}, 0.1, 0), std::invalid_argument);
}

TEST(Qasm, Deterministic) {
  const auto terms = headline_terms(3);
  EXPECT_EQ(emit_qasm(build_trotter_circuit(terms, 0.3, 4)), emit_qasm(build_trotter_circuit(headline_terms(3), 0.3, 4)));
}
