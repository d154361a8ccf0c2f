#pragma once

// Matrix elements of the normal-ordered cosine interaction between Fock states,
// and assembly of the truncated Hamiltonian H = H0 + V.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "htqft/fock.hpp"
#include "htqft/format.hpp"
#include "htqft/model.hpp"

namespace htqft {

using complex = std::complex<double>;

/// i^q for integer q.
inline complex i_pow(int q) {
  switch (((q % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

namespace detail {

/// Real part R of the single-mode factor, F(r_out, r_in) = i^|d| R with d = r_out - r_in.
/// Sum over the number s of contracted quanta, built by the ratio
/// t_{s+1}/t_s = xi^2 (lo - s) / ((s + 1)(s + 1 + |d|)).
inline double mode_factor_real(double xi, int r_out, int r_in) {
  const int lo = std::min(r_out, r_in);
  const int hi = std::max(r_out, r_in);
  const int d = hi - lo;
  double t = 1.0;
  for (int k = lo + 1; k <= hi; ++k) t *= static_cast<double>(k);
  t = std::sqrt(t);
  for (int k = 1; k <= d; ++k) t *= xi / static_cast<double>(k);
  const double xi2 = xi * xi;
  double sum = t;
  for (int s = 0; s < lo; ++s) {
    t *= -xi2 * static_cast<double>(lo - s) / (static_cast<double>(s + 1) * static_cast<double>(s + 1 + d));
    sum += t;
  }
  return sum;
}

}  // namespace detail

/// <r_out| exp(i xi a^dag) exp(i xi a) |r_in> for one oscillator mode.
inline complex mode_factor(double xi, int r_out, int r_in) {
  if (r_out < 0 || r_in < 0) throw std::invalid_argument("mode_factor: negative occupation");
  return i_pow(std::abs(r_out - r_in)) * detail::mode_factor_real(xi, r_out, r_in);
}

struct VertexOptions {
  /// Forbid any change of the zero-mode occupation.
  bool zero_mode_delta = false;
};

namespace detail {

/// Product over modes of F_n(bra_n, ket_n), returned as (phase exponent q, real magnitude) with value i^q R.
struct VertexProduct {
  int phase = 0;
  double magnitude = 1.0;
  complex value() const { return i_pow(phase) * magnitude; }
};

inline VertexProduct vertex_product(const FockState& bra, const FockState& ket, const ModeTable& modes) {
  VertexProduct out;
  const int n_reach = std::max(bra.max_abs_mode(), ket.max_abs_mode());
  for (int a = 0; a <= n_reach; ++a) {
    for (int side = 0; side < (a == 0 ? 1 : 2); ++side) {
      const int n = side == 0 ? a : -a;
      const int r_out = bra.occupation(n);
      const int r_in = ket.occupation(n);
      if (r_out == 0 && r_in == 0) continue;
      const double xi = modes.at(n).xi;
      out.phase += std::abs(r_out - r_in);
      out.magnitude *= mode_factor_real(xi, r_out, r_in);
    }
  }
  return out;
}

}  // namespace detail

/// <bra|V|ket> = -c m M L [ e^{i theta} prod_n F_n(r'_n, r_n) + e^{-i theta} conj(prod_n F_n(r_n, r'_n)) ]
/// when the momentum numbers agree, exactly zero otherwise.
inline complex v_element(const FockState& bra, const FockState& ket, const ModelParams& params,
                         const ModeTable& modes, const VertexOptions& options = {}) {
  const int reach = std::max(bra.max_abs_mode(), ket.max_abs_mode());
  if (reach > modes.n_max())
    throw std::out_of_range("v_element: mode " + std::to_string(reach) + " outside mode table |n| <= " +
                            std::to_string(modes.n_max()));
  if (bra.momentum_number() != ket.momentum_number()) return {0.0, 0.0};
  if (options.zero_mode_delta && bra.occupation(0) != ket.occupation(0)) return {0.0, 0.0};
  const double pref = params.vertex_prefactor();
  if (pref == 0.0) return {0.0, 0.0};

  const complex forward = detail::vertex_product(bra, ket, modes).value();
  const complex backward = std::conj(detail::vertex_product(ket, bra, modes).value());
  const double theta = params.theta();
  if (theta == 0.0) return -pref * (forward + backward);
  const complex phase = std::polar(1.0, theta);
  return -pref * (phase * forward + std::conj(phase) * backward);
}

/// Dense H = H0 + V on a truncated basis. Keeps H0 and V separately.
class HMatrix {
public:
  HMatrix() = default;
  HMatrix(TruncatedBasis basis, Eigen::VectorXd h0, Eigen::MatrixXcd v, double theta)
      : basis_(std::move(basis)), h0_(std::move(h0)), v_(std::move(v)), theta_(theta) {
    full_ = v_;
    for (Eigen::Index i = 0; i < h0_.size(); ++i) full_(i, i) += h0_(i);
  }

  Eigen::Index dim() const { return full_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return full_; }
  const Eigen::VectorXd& h0() const { return h0_; }
  const Eigen::MatrixXcd& interaction() const { return v_; }
  const TruncatedBasis& basis() const { return basis_; }
  double theta() const { return theta_; }
  complex operator()(Eigen::Index a, Eigen::Index b) const { return full_(a, b); }

private:
  TruncatedBasis basis_;
  Eigen::VectorXd h0_;
  Eigen::MatrixXcd v_;
  Eigen::MatrixXcd full_;
  double theta_ = 0.0;
};

struct AssembleOptions {
  VertexOptions vertex;
  /// Row blocks are distributed over this many threads; each entry is written once.
  unsigned workers = 1;
};

inline HMatrix assemble(const TruncatedBasis& basis, const ModelParams& params, const AssembleOptions& options = {}) {
  if (basis.empty()) throw std::invalid_argument("assemble: empty basis");
  const ModeTable& modes = basis.modes();
  if (std::abs(modes.length() - params.length()) > 1e-12 * params.length() ||
      std::abs(modes.scalar_mass() - params.scalar_mass()) > 1e-12 * params.scalar_mass())
    throw std::invalid_argument("assemble: basis was enumerated for different g or L than the given parameters");

  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXd h0(dim);
  for (Eigen::Index a = 0; a < dim; ++a) h0(a) = basis.energy(static_cast<std::size_t>(a));

  Eigen::MatrixXcd v(dim, dim);
  auto fill_rows = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index a = begin; a < end; ++a)
      for (Eigen::Index b = 0; b < dim; ++b)
        v(a, b) = v_element(basis.state(static_cast<std::size_t>(a)), basis.state(static_cast<std::size_t>(b)),
                            params, modes, options.vertex);
  };

  const auto workers = static_cast<Eigen::Index>(std::clamp<unsigned>(options.workers, 1u, 64u));
  if (workers == 1 || dim < 2 * workers) {
    fill_rows(0, dim);
  } else {
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (dim + workers - 1) / workers;
    for (Eigen::Index w = 0; w < workers; ++w) {
      const Eigen::Index begin = w * chunk;
      const Eigen::Index end = std::min(dim, begin + chunk);
      if (begin < end) pool.emplace_back(fill_rows, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return HMatrix(basis, std::move(h0), std::move(v), params.theta());
}

/// max |H_ab - conj(H_ba)|.
inline double hermiticity_defect(const Eigen::MatrixXcd& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

inline double max_abs_entry(const Eigen::MatrixXcd& h) { return h.size() == 0 ? 0.0 : h.cwiseAbs().maxCoeff(); }

inline double max_imag_entry(const Eigen::MatrixXcd& h) {
  return h.size() == 0 ? 0.0 : h.imag().cwiseAbs().maxCoeff();
}

/// JSON header line, then one row per line as re,im pairs.
inline void write_matrix_dump(std::ostream& os, const HMatrix& h, const ModelParams& params) {
  os << "{\"dim\":" << h.dim() << ",\"params\":{\"g\":" << format_double(params.g())
     << ",\"m\":" << format_double(params.m()) << ",\"L\":" << format_double(params.length())
     << ",\"theta\":" << format_double(params.theta()) << "},\"sector\":\"" << to_string(h.basis().sector())
     << "\",\"basis_checksum\":\"" << basis_checksum(h.basis()) << "\"}\n";
  for (Eigen::Index a = 0; a < h.dim(); ++a) {
    for (Eigen::Index b = 0; b < h.dim(); ++b) {
      if (b != 0) os << ',';
      os << format_double(h(a, b).real()) << ',' << format_double(h(a, b).imag());
    }
    os << '\n';
  }
}

}  // namespace htqft
