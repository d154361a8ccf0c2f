#pragma once

// Gate-level synthesis of the first-order Trotter step and OpenQASM 2.0 emission.
// Qubit i of a Pauli word is q[i] in the emitted circuit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "htqft/evolve.hpp"
#include "htqft/format.hpp"
#include "htqft/pauli.hpp"

namespace htqft {

enum class GateKind { hadamard, rx, cx, rz };

struct GateOp {
  GateKind kind = GateKind::hadamard;
  int qubit = 0;   // target, or control for cx
  int target = -1; // cx target
  double angle = 0.0;

  static GateOp h(int q) { return {GateKind::hadamard, q, -1, 0.0}; }
  static GateOp rx(int q, double angle) { return {GateKind::rx, q, -1, angle}; }
  static GateOp cx(int control, int target) { return {GateKind::cx, control, target, 0.0}; }
  static GateOp rz(int q, double angle) { return {GateKind::rz, q, -1, angle}; }

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

struct PauliExponential {
  std::vector<GateOp> gates;
  /// Angle of the global phase e^{-i angle} left over from an all-identity word.
  double global_phase = 0.0;
};

/// Gates for exp(-i angle P_word): basis change to Z, CNOT ladder onto the last
/// active qubit, rz(2 angle), then the inverse ladder and basis change.
inline PauliExponential pauli_exp_circuit(const std::string& word, double angle) {
  if (!std::isfinite(angle)) throw std::invalid_argument("pauli_exp_circuit: angle must be finite");
  PauliExponential out;
  std::vector<int> active;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!is_pauli_letter(word[i])) throw std::invalid_argument("invalid Pauli letter in word '" + word + "'");
    if (word[i] != 'I') active.push_back(static_cast<int>(i));
  }
  if (active.empty()) {
    out.global_phase = angle;
    return out;
  }
  const double half_pi = std::numbers::pi / 2.0;
  for (int q : active) {
    const char c = word[static_cast<std::size_t>(q)];
    if (c == 'X') out.gates.push_back(GateOp::h(q));
    if (c == 'Y') out.gates.push_back(GateOp::rx(q, half_pi));
  }
  for (std::size_t k = 0; k + 1 < active.size(); ++k) out.gates.push_back(GateOp::cx(active[k], active[k + 1]));
  out.gates.push_back(GateOp::rz(active.back(), 2.0 * angle));
  for (std::size_t k = active.size() - 1; k-- > 0;) out.gates.push_back(GateOp::cx(active[k], active[k + 1]));
  for (int q : active) {
    const char c = word[static_cast<std::size_t>(q)];
    if (c == 'X') out.gates.push_back(GateOp::h(q));
    if (c == 'Y') out.gates.push_back(GateOp::rx(q, -half_pi));
  }
  return out;
}

struct TrotterCircuit {
  int n_q = 0;
  std::vector<GateOp> gates;  // one step
  double dt = 0.0;
  int steps = 1;
  std::size_t term_count = 0;
  std::size_t two_qubit_gates = 0;  // per step
  std::size_t rotations = 0;        // rz per step
  std::size_t depth = 0;            // per step
  double global_phase = 0.0;        // per step, from identity terms
};

inline std::size_t circuit_depth(const std::vector<GateOp>& gates, int n_q) {
  std::vector<std::size_t> layer(static_cast<std::size_t>(std::max(n_q, 0)), 0);
  std::size_t depth = 0;
  for (const auto& g : gates) {
    auto& a = layer.at(static_cast<std::size_t>(g.qubit));
    if (g.kind == GateKind::cx) {
      auto& b = layer.at(static_cast<std::size_t>(g.target));
      a = b = std::max(a, b) + 1;
    } else {
      ++a;
    }
    depth = std::max(depth, a);
  }
  return depth;
}

/// One Trotter step: per-term circuits concatenated in term order; metadata covers n_steps repetitions.
inline TrotterCircuit build_trotter_circuit(const std::vector<PauliTerm>& terms, double dt, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("build_trotter_circuit: need at least one step");
  if (terms.empty()) throw std::invalid_argument("build_trotter_circuit: empty term list has no qubit count");
  TrotterCircuit c;
  c.n_q = static_cast<int>(terms.front().word.size());
  c.dt = dt;
  c.steps = n_steps;
  c.term_count = terms.size();
  for (const auto& t : terms) {
    if (static_cast<int>(t.word.size()) != c.n_q) throw std::invalid_argument("build_trotter_circuit: word lengths differ");
    if (std::abs(t.coeff.imag()) > 1e-12 * std::max(1.0, std::abs(t.coeff.real())))
      throw std::invalid_argument("build_trotter_circuit: term " + t.word + " has a non-real coefficient");
    PauliExponential p = pauli_exp_circuit(t.word, t.coeff.real() * dt);
    c.global_phase += p.global_phase;
    for (const auto& g : p.gates) {
      if (g.kind == GateKind::cx) ++c.two_qubit_gates;
      if (g.kind == GateKind::rz) ++c.rotations;
      c.gates.push_back(g);
    }
  }
  c.depth = circuit_depth(c.gates, c.n_q);
  return c;
}

/// Measurement-only circuit on n_q qubits (e.g. for a term list that vanished).
inline TrotterCircuit empty_circuit(int n_q, double dt, int n_steps) {
  TrotterCircuit c;
  c.n_q = n_q;
  c.dt = dt;
  c.steps = n_steps;
  return c;
}

inline void apply_gate(const GateOp& g, StateVector& psi) {
  const int n_q = psi.n_q();
  auto bit_of = [n_q](int q) {
    if (q < 0 || q >= n_q) throw std::out_of_range("gate qubit index out of range");
    return std::uint64_t{1} << (n_q - 1 - q);
  };
  auto& a = psi.amps();
  const auto dim = static_cast<std::uint64_t>(a.size());
  const std::uint64_t bit = bit_of(g.qubit);
  const complex i{0.0, 1.0};
  switch (g.kind) {
    case GateKind::hadamard: {
      const double r = 1.0 / std::sqrt(2.0);
      for (std::uint64_t b = 0; b < dim; ++b) {
        if (b & bit) continue;
        const complex a0 = a(static_cast<Eigen::Index>(b)), a1 = a(static_cast<Eigen::Index>(b | bit));
        a(static_cast<Eigen::Index>(b)) = r * (a0 + a1);
        a(static_cast<Eigen::Index>(b | bit)) = r * (a0 - a1);
      }
      break;
    }
    case GateKind::rx: {
      const double c = std::cos(g.angle / 2.0), s = std::sin(g.angle / 2.0);
      for (std::uint64_t b = 0; b < dim; ++b) {
        if (b & bit) continue;
        const complex a0 = a(static_cast<Eigen::Index>(b)), a1 = a(static_cast<Eigen::Index>(b | bit));
        a(static_cast<Eigen::Index>(b)) = c * a0 - i * s * a1;
        a(static_cast<Eigen::Index>(b | bit)) = c * a1 - i * s * a0;
      }
      break;
    }
    case GateKind::rz: {
      const complex lo = std::polar(1.0, -g.angle / 2.0), hi = std::polar(1.0, g.angle / 2.0);
      for (std::uint64_t b = 0; b < dim; ++b) a(static_cast<Eigen::Index>(b)) *= (b & bit) ? hi : lo;
      break;
    }
    case GateKind::cx: {
      const std::uint64_t tbit = bit_of(g.target);
      if (tbit == bit) throw std::invalid_argument("cx: control equals target");
      for (std::uint64_t b = 0; b < dim; ++b)
        if ((b & bit) && !(b & tbit))
          std::swap(a(static_cast<Eigen::Index>(b)), a(static_cast<Eigen::Index>(b | tbit)));
      break;
    }
  }
}

inline void simulate_gates(const std::vector<GateOp>& gates, StateVector& psi) {
  for (const auto& g : gates) apply_gate(g, psi);
}

/// Runs one step of the circuit; with include_global_phase the identity-term phase is applied too.
inline void simulate_step(const TrotterCircuit& c, StateVector& psi, bool include_global_phase = true) {
  if (psi.n_q() != c.n_q) throw std::invalid_argument("simulate_step: state does not match circuit width");
  simulate_gates(c.gates, psi);
  if (include_global_phase && c.global_phase != 0.0) psi.amps() *= std::polar(1.0, -c.global_phase);
}

inline std::string gate_statement(const GateOp& g) {
  const std::string q = "q[" + std::to_string(g.qubit) + "]";
  switch (g.kind) {
    case GateKind::hadamard: return "h " + q + ";";
    case GateKind::rx: {
      const double half_pi = std::numbers::pi / 2.0;
      if (g.angle == half_pi) return "rx(pi/2) " + q + ";";
      if (g.angle == -half_pi) return "rx(-pi/2) " + q + ";";
      return "rx(" + format_real_literal(g.angle) + ") " + q + ";";
    }
    case GateKind::rz: return "rz(" + format_real_literal(g.angle) + ") " + q + ";";
    case GateKind::cx: return "cx " + q + ",q[" + std::to_string(g.target) + "];";
  }
  return "";
}

/// OpenQASM 2.0: the step's gates repeated `steps` times, then measurement of every qubit.
inline std::string emit_qasm(const TrotterCircuit& c) {
  std::ostringstream os;
  os << "OPENQASM 2.0;\n"
     << "include \"qelib1.inc\";\n"
     << "// trotter n_q=" << c.n_q << " terms=" << c.term_count << " dt=" << format_double(c.dt)
     << " steps=" << c.steps << " global_phase_per_step=" << format_double(c.global_phase) << '\n'
     << "qreg q[" << c.n_q << "];\n"
     << "creg c[" << c.n_q << "];\n";
  for (int s = 0; s < c.steps; ++s)
    for (const auto& g : c.gates) os << gate_statement(g) << '\n';
  for (int q = 0; q < c.n_q; ++q) os << "measure q[" << q << "] -> c[" << q << "];\n";
  return os.str();
}

/// {n_q, terms, two_qubit_gates, rotations, steps, depth, dt}; gate counts are per step.
inline std::string resource_json(const TrotterCircuit& c) {
  std::ostringstream os;
  os << "{\"n_q\":" << c.n_q << ",\"terms\":" << c.term_count << ",\"two_qubit_gates\":" << c.two_qubit_gates
     << ",\"rotations\":" << c.rotations << ",\"steps\":" << c.steps << ",\"depth\":" << c.depth
     << ",\"dt\":" << format_double(c.dt) << "}\n";
  return os.str();
}

}  // namespace htqft
