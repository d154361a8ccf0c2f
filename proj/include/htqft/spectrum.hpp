#pragma once

// Dense diagonalisation of truncated Hamiltonians and the vector mass.

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "htqft/fock.hpp"
#include "htqft/format.hpp"
#include "htqft/matelem.hpp"
#include "htqft/model.hpp"

namespace htqft {

struct QubitCount {
  int value = 0;
};

struct EnergyCutoff {
  double value = 0.0;
};

using Truncation = std::variant<QubitCount, EnergyCutoff>;

inline std::string describe(const Truncation& t) {
  if (const auto* q = std::get_if<QubitCount>(&t)) return "n_q=" + std::to_string(q->value);
  return "e_max=" + format_double(std::get<EnergyCutoff>(t).value);
}

inline TruncatedBasis sector_basis(const ModelParams& params, const Truncation& t, Sector sector) {
  if (const auto* q = std::get_if<QubitCount>(&t)) return enumerate_for_qubits(params, q->value, sector);
  return enumerate_basis(params, std::get<EnergyCutoff>(t).value, sector);
}

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;    // ascending
  Eigen::MatrixXcd eigenvectors;  // columns, matching eigenvalues
  Eigen::VectorXcd ground_vector;
  Sector sector = Sector::both;
  std::string truncation;
};

/// Eigen-decomposition of a Hermitian matrix. Real symmetric input takes the real solver.
inline SpectrumResult eigensystem(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("eigensystem: need a non-empty square matrix");
  const double scale = std::max(max_abs_entry(h), 1e-300);
  const double defect = hermiticity_defect(h);
  if (defect > 1e-10 * scale)
    throw std::invalid_argument("eigensystem: matrix is not Hermitian (defect " + format_double(defect) + ")");

  SpectrumResult out;
  if (max_imag_entry(h) == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensystem: real solver failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors().cast<complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensystem: complex solver failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
  }
  out.ground_vector = out.eigenvectors.col(0);
  return out;
}

inline SpectrumResult eigensystem(const HMatrix& h) {
  SpectrumResult out = eigensystem(h.matrix());
  out.sector = h.basis().sector();
  if (auto nq = h.basis().n_q())
    out.truncation = "n_q=" + std::to_string(*nq);
  else
    out.truncation = "e_max=" + format_double(h.basis().e_max());
  return out;
}

struct VectorMassResult {
  double mass = 0.0;
  double even_ground = 0.0;
  double odd_ground = 0.0;
  std::size_t even_dim = 0;
  std::size_t odd_dim = 0;
};

/// Lowest odd-sector level minus lowest even-sector level, each from its own truncated Hamiltonian.
inline VectorMassResult vector_mass_detail(const ModelParams& params, const Truncation& t,
                                           const AssembleOptions& options = {}) {
  const TruncatedBasis even = sector_basis(params, t, Sector::even);
  const TruncatedBasis odd = sector_basis(params, t, Sector::odd);
  if (even.empty() || odd.empty())
    throw std::runtime_error("vector_mass: empty sector at " + describe(t) + " (even " + std::to_string(even.size()) +
                             ", odd " + std::to_string(odd.size()) + " states)");
  VectorMassResult r;
  r.even_ground = eigensystem(assemble(even, params, options)).eigenvalues(0);
  r.odd_ground = eigensystem(assemble(odd, params, options)).eigenvalues(0);
  r.mass = r.odd_ground - r.even_ground;
  r.even_dim = even.size();
  r.odd_dim = odd.size();
  return r;
}

inline double vector_mass(const ModelParams& params, const Truncation& t, const AssembleOptions& options = {}) {
  return vector_mass_detail(params, t, options).mass;
}

struct VectorMassRow {
  double m_over_g = 0.0;
  int n_q = 0;
  double mass_over_g = 0.0;
};

inline void write_vector_mass_csv(std::ostream& os, const std::vector<VectorMassRow>& rows) {
  os << "m_over_g,n_q,vector_mass_over_g\n";
  for (const auto& r : rows)
    os << format_double(r.m_over_g) << ',' << r.n_q << ',' << format_double(r.mass_over_g) << '\n';
}

}  // namespace htqft
