#pragma once

// Post-quench real-time evolution from the Fock vacuum: exact exponentiation
// through the eigensystem, and first-order Trotter products of Pauli exponentials.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "htqft/fock.hpp"
#include "htqft/format.hpp"
#include "htqft/matelem.hpp"
#include "htqft/model.hpp"
#include "htqft/pauli.hpp"
#include "htqft/spectrum.hpp"

namespace htqft {

class StateVector {
public:
  StateVector() = default;
  explicit StateVector(Eigen::VectorXcd amps) : amps_(std::move(amps)) {}

  /// |index> in a space of dimension dim.
  static StateVector basis_state(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim) throw std::out_of_range("basis_state: index outside dimension");
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(dim);
    a(index) = 1.0;
    return StateVector(std::move(a));
  }

  Eigen::Index dim() const { return amps_.size(); }
  int n_q() const { return qubit_count_for_dim(dim()); }
  double norm() const { return amps_.norm(); }
  complex operator[](Eigen::Index i) const { return amps_(i); }
  complex& operator[](Eigen::Index i) { return amps_(i); }
  const Eigen::VectorXcd& amps() const { return amps_; }
  Eigen::VectorXcd& amps() { return amps_; }

  /// <this|other>
  complex overlap(const StateVector& other) const {
    if (other.dim() != dim()) throw std::invalid_argument("overlap: dimension mismatch");
    return amps_.dot(other.amps_);
  }

private:
  Eigen::VectorXcd amps_;
};

/// |<a|b>|^2
inline double fidelity(const StateVector& a, const StateVector& b) { return std::norm(a.overlap(b)); }

/// Caches the eigensystem of H for repeated exact propagation.
class ExactPropagator {
public:
  explicit ExactPropagator(const Eigen::MatrixXcd& h) : spectrum_(eigensystem(h)) {}
  explicit ExactPropagator(const HMatrix& h) : spectrum_(eigensystem(h)) {}

  Eigen::Index dim() const { return spectrum_.eigenvalues.size(); }
  const SpectrumResult& spectrum() const { return spectrum_; }

  /// sum_k e^{-i lambda_k t} v_k <v_k|psi0>
  StateVector evolve(const StateVector& psi0, double t) const {
    if (psi0.dim() != dim()) throw std::invalid_argument("evolve: state dimension does not match Hamiltonian");
    if (t == 0.0) return psi0;
    const Eigen::MatrixXcd& v = spectrum_.eigenvectors;
    Eigen::VectorXcd coeffs = v.adjoint() * psi0.amps();
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) *= std::polar(1.0, -spectrum_.eigenvalues(k) * t);
    return StateVector(v * coeffs);
  }

  /// e^{-i H t} as a dense matrix.
  Eigen::MatrixXcd unitary(double t) const {
    const Eigen::MatrixXcd& v = spectrum_.eigenvectors;
    Eigen::VectorXcd phases(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) phases(k) = std::polar(1.0, -spectrum_.eigenvalues(k) * t);
    return v * phases.asDiagonal() * v.adjoint();
  }

private:
  SpectrumResult spectrum_;
};

inline StateVector evolve_exact(const HMatrix& h, const StateVector& psi0, double t) {
  return ExactPropagator(h).evolve(psi0, t);
}

inline StateVector evolve_exact(const Eigen::MatrixXcd& h, const StateVector& psi0, double t) {
  return ExactPropagator(h).evolve(psi0, t);
}

inline StateVector apply_pauli(const std::string& word, const StateVector& psi) {
  if (static_cast<int>(word.size()) != psi.n_q())
    throw std::invalid_argument("apply_pauli: word '" + word + "' does not match " + std::to_string(psi.n_q()) +
                                " qubits");
  const PauliMasks m = pauli_masks(word);
  Eigen::VectorXcd out(psi.dim());
  for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(psi.dim()); ++c)
    out(static_cast<Eigen::Index>(c ^ m.flip)) = m.phase(c) * psi[static_cast<Eigen::Index>(c)];
  return StateVector(std::move(out));
}

/// Precompiled product of exp(-i alpha_w P_w dt) factors in the order given.
class TrotterStepper {
public:
  TrotterStepper(const std::vector<PauliTerm>& terms, double dt, bool reverse_order = false) : dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("trotter: dt must be positive");
    for (const auto& t : terms) {
      const double scale = std::max(1.0, std::abs(t.coeff.real()));
      if (std::abs(t.coeff.imag()) > 1e-12 * scale)
        throw std::invalid_argument("trotter: term " + t.word + " has a non-real coefficient");
      if (n_q_ < 0) n_q_ = static_cast<int>(t.word.size());
      if (static_cast<int>(t.word.size()) != n_q_) throw std::invalid_argument("trotter: inconsistent word lengths");
      Factor f;
      f.masks = pauli_masks(t.word);
      f.c = std::cos(t.coeff.real() * dt);
      f.s = std::sin(t.coeff.real() * dt);
      factors_.push_back(f);
    }
    if (reverse_order) std::reverse(factors_.begin(), factors_.end());
  }

  double dt() const { return dt_; }

  /// psi <- prod_w [cos(alpha_w dt) - i sin(alpha_w dt) P_w] psi, in place.
  void step(StateVector& psi) const {
    if (n_q_ >= 0 && psi.n_q() != n_q_) throw std::invalid_argument("trotter: state does not match term word length");
    auto& a = psi.amps();
    const auto dim = static_cast<std::uint64_t>(a.size());
    const complex minus_i{0.0, -1.0};
    for (const auto& f : factors_) {
      const PauliMasks& m = f.masks;
      if (m.flip == 0) {
        for (std::uint64_t b = 0; b < dim; ++b)
          a(static_cast<Eigen::Index>(b)) *= f.c + minus_i * f.s * m.phase(b);
        continue;
      }
      // pairs (b, b ^ flip) with the top flipped bit clear in b
      const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(m.flip));
      for (std::uint64_t b = 0; b < dim; ++b) {
        if (b & top) continue;
        const std::uint64_t p = b ^ m.flip;
        const complex a0 = a(static_cast<Eigen::Index>(b));
        const complex a1 = a(static_cast<Eigen::Index>(p));
        a(static_cast<Eigen::Index>(b)) = f.c * a0 + minus_i * f.s * m.phase(p) * a1;
        a(static_cast<Eigen::Index>(p)) = f.c * a1 + minus_i * f.s * m.phase(b) * a0;
      }
    }
  }

private:
  struct Factor {
    PauliMasks masks;
    double c = 1.0;
    double s = 0.0;
  };
  std::vector<Factor> factors_;
  double dt_;
  int n_q_ = -1;
};

inline StateVector trotter_step(const std::vector<PauliTerm>& terms, double dt, StateVector psi) {
  TrotterStepper(terms, dt).step(psi);
  return psi;
}

/// Two-factor splitting e^{-i V dt} e^{-i H0 dt}; a cross-check for the Pauli-term product.
class SplitStepper {
public:
  SplitStepper(const HMatrix& h, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("split: dt must be positive");
    h0_phase_.resize(h.dim());
    for (Eigen::Index i = 0; i < h.dim(); ++i) h0_phase_(i) = std::polar(1.0, -h.h0()(i) * dt);
    v_step_ = ExactPropagator(h.interaction()).unitary(dt);
  }

  void step(StateVector& psi) const {
    psi.amps() = v_step_ * h0_phase_.cwiseProduct(psi.amps());
  }

private:
  Eigen::VectorXcd h0_phase_;
  Eigen::MatrixXcd v_step_;
};

enum class EvolutionKind { exp, trotter, split };

struct QuenchMethod {
  EvolutionKind kind = EvolutionKind::exp;
  double dt = 0.0;

  static QuenchMethod exp() { return {EvolutionKind::exp, 0.0}; }
  static QuenchMethod trotter(double dt) { return {EvolutionKind::trotter, dt}; }
  static QuenchMethod split(double dt) { return {EvolutionKind::split, dt}; }

  std::string name() const {
    switch (kind) {
      case EvolutionKind::exp: return "exp";
      case EvolutionKind::trotter: return "trotter";
      case EvolutionKind::split: return "split";
    }
    return "?";
  }
};

struct QuenchOptions {
  Sector sector = Sector::even;
  bool reverse_order = false;
  AssembleOptions assemble;
  DecomposeOptions decompose;
  /// Called with (t, psi(t)) at every recorded sample.
  std::function<void(double, const StateVector&)> observer;
};

struct QuenchSeries {
  std::vector<double> times;
  std::vector<complex> amplitudes;  // G(t) = <vac|psi(t)>
  QuenchMethod method;
  ModelParams params{1.0, 0.0, 1.0};
  int n_q = 0;
  Sector sector = Sector::even;

  std::size_t size() const { return times.size(); }
  double probability(std::size_t i) const { return std::norm(amplitudes.at(i)); }
};

/// Sample count k = 0..K with k * step <= t_max (relative slack 1e-9).
inline long sample_count(double t_max, double step) {
  return static_cast<long>(std::floor(t_max / step + 1e-9)) + 1;
}

/// k * step rounded to 12 decimals.
inline double grid_time(long k, double step) {
  return std::round(static_cast<double>(k) * step * 1e12) / 1e12;
}

/// G(t) from the vacuum (index 0 of basis) sampled every sample_dt up to t_max.
inline QuenchSeries quench_series(const ModelParams& params, const TruncatedBasis& basis, double t_max,
                                  double sample_dt, const QuenchMethod& method, const QuenchOptions& options = {}) {
  if (basis.empty() || !basis.state(0).is_vacuum()) throw std::invalid_argument("quench: basis does not start at the vacuum");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("quench: t_max must be positive");
  if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) throw std::invalid_argument("quench: sample_dt must be positive");
  if (basis.sector() == Sector::odd)
    throw std::invalid_argument("quench: the vacuum is not in the odd sector; use sector even or both");

  long stride = 1;
  if (method.kind != EvolutionKind::exp) {
    if (!(method.dt > 0.0) || !std::isfinite(method.dt)) throw std::invalid_argument("quench: dt must be positive");
    stride = std::lround(sample_dt / method.dt);
    if (stride < 1 || std::abs(static_cast<double>(stride) * method.dt - sample_dt) > 1e-9 * sample_dt)
      throw std::invalid_argument("quench: sample_dt " + format_double(sample_dt) +
                                  " is not a positive integer multiple of dt " + format_double(method.dt));
  }

  const HMatrix h = assemble(basis, params, options.assemble);
  if (method.kind == EvolutionKind::trotter) qubit_count_for_dim(h.dim());

  QuenchSeries out;
  out.method = method;
  out.params = params;
  out.n_q = basis.n_q() ? *basis.n_q() : static_cast<int>(std::bit_width(basis.size()) - 1);
  out.sector = basis.sector();

  const StateVector vac = StateVector::basis_state(h.dim(), 0);
  auto record = [&](double t, const StateVector& psi) {
    out.times.push_back(t);
    out.amplitudes.push_back(psi[0]);
    if (options.observer) options.observer(t, psi);
  };

  if (method.kind == EvolutionKind::exp) {
    const ExactPropagator prop(h);
    const long samples = sample_count(t_max, sample_dt);
    for (long k = 0; k < samples; ++k) {
      const double t = grid_time(k, sample_dt);
      record(t, prop.evolve(vac, t));
    }
    return out;
  }

  const long steps = sample_count(t_max, method.dt) - 1;
  StateVector psi = vac;
  record(0.0, psi);
  auto run = [&](const auto& stepper) {
    for (long k = 1; k <= steps; ++k) {
      stepper.step(psi);
      if (k % stride == 0) record(grid_time(k, method.dt), psi);
    }
  };
  if (method.kind == EvolutionKind::trotter)
    run(TrotterStepper(decompose(h, options.decompose), method.dt, options.reverse_order));
  else
    run(SplitStepper(h, method.dt));
  return out;
}

inline QuenchSeries quench_series(const ModelParams& params, int n_q, double t_max, double sample_dt,
                                  const QuenchMethod& method, const QuenchOptions& options = {}) {
  if (n_q < 1) throw std::invalid_argument("quench: n_q must be >= 1");
  if (options.sector == Sector::odd)
    throw std::invalid_argument("quench: the vacuum is not in the odd sector; use sector even or both");
  return quench_series(params, enumerate_for_qubits(params, n_q, options.sector), t_max, sample_dt, method, options);
}

/// Header comment with the run parameters, then `t,re_G,im_G,prob`.
inline void write_quench_csv(std::ostream& os, const QuenchSeries& s) {
  os << "# m_over_g=" << format_double(s.params.m() / s.params.g())
     << " gL=" << format_double(s.params.g() * s.params.length()) << " theta=" << format_double(s.params.theta())
     << " n_q=" << s.n_q << " sector=" << to_string(s.sector) << " method=" << s.method.name();
  if (s.method.kind != EvolutionKind::exp) os << " dt=" << format_double(s.method.dt);
  os << '\n' << "t,re_G,im_G,prob\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << format_double(s.times[i]) << ',' << format_double(s.amplitudes[i].real()) << ','
       << format_double(s.amplitudes[i].imag()) << ',' << format_double(s.probability(i)) << '\n';
}

}  // namespace htqft
