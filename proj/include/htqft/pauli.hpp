#pragma once

// Pauli-word decomposition of 2^n_q dimensional matrices.
//
// Qubit i is letter i of a word (leftmost is qubit 0) and corresponds to the
// most significant bit first: a word acts on basis index b through bit
// (n_q - 1 - i) of b, i.e. P = sigma_{w_0} (x) sigma_{w_1} (x) ... in Kronecker order.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "htqft/format.hpp"
#include "htqft/matelem.hpp"

namespace htqft {

struct PauliTerm {
  std::string word;
  complex coeff;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

inline bool is_pauli_letter(char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }

inline bool is_identity_word(const std::string& word) {
  return std::all_of(word.begin(), word.end(), [](char c) { return c == 'I'; });
}

/// Bit masks describing P|b> = phase(b) |b ^ flip>, phase(b) = i^{#Y} (-1)^{popcount(b & sign)}.
struct PauliMasks {
  std::uint64_t flip = 0;  // X or Y
  std::uint64_t sign = 0;  // Y or Z
  int y_count = 0;
  int n_q = 0;

  complex phase(std::uint64_t b) const {
    const int q = y_count + 2 * (std::popcount(b & sign) & 1);
    return i_pow(q);
  }
};

inline PauliMasks pauli_masks(const std::string& word) {
  PauliMasks m;
  m.n_q = static_cast<int>(word.size());
  if (m.n_q > 62) throw std::invalid_argument("pauli word longer than 62 qubits");
  for (int i = 0; i < m.n_q; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << (m.n_q - 1 - i);
    switch (word[static_cast<std::size_t>(i)]) {
      case 'I': break;
      case 'X': m.flip |= bit; break;
      case 'Y':
        m.flip |= bit;
        m.sign |= bit;
        ++m.y_count;
        break;
      case 'Z': m.sign |= bit; break;
      default: throw std::invalid_argument("invalid Pauli letter in word '" + word + "'");
    }
  }
  return m;
}

inline int qubit_count_for_dim(Eigen::Index dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

/// Word with index w in canonical order I < X < Y < Z (base-4 digits, qubit 0 most significant).
inline std::string word_from_index(std::uint64_t w, int n_q) {
  static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
  std::string word(static_cast<std::size_t>(n_q), 'I');
  for (int i = n_q - 1; i >= 0; --i) {
    word[static_cast<std::size_t>(i)] = letters[w & 3];
    w >>= 2;
  }
  return word;
}

struct DecomposeOptions {
  /// Terms with |alpha| <= drop_relative * max|alpha| are omitted.
  double drop_relative = 1e-14;
};

/// alpha_w = Tr(P_w H) / 2^n_q for every word, walking each word's signed permutation.
/// Returned in canonical word order.
inline std::vector<PauliTerm> decompose(const Eigen::MatrixXcd& h, const DecomposeOptions& options = {}) {
  if (h.rows() != h.cols()) throw std::invalid_argument("decompose: matrix not square");
  const int n_q = qubit_count_for_dim(h.rows());
  const auto dim = static_cast<std::uint64_t>(h.rows());
  const std::uint64_t n_words = std::uint64_t{1} << (2 * n_q);

  std::vector<complex> alpha(n_words);
  double largest = 0.0;
  for (std::uint64_t w = 0; w < n_words; ++w) {
    const PauliMasks m = pauli_masks(word_from_index(w, n_q));
    complex tr{0.0, 0.0};
    // Tr(P H) = sum_c <c ^ flip| P |c> H(c, c ^ flip)
    for (std::uint64_t c = 0; c < dim; ++c)
      tr += m.phase(c) * h(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c ^ m.flip));
    alpha[w] = tr / static_cast<double>(dim);
    largest = std::max(largest, std::abs(alpha[w]));
  }

  std::vector<PauliTerm> terms;
  const double cut = options.drop_relative * largest;
  for (std::uint64_t w = 0; w < n_words; ++w)
    if (std::abs(alpha[w]) > cut) terms.push_back({word_from_index(w, n_q), alpha[w]});
  return terms;
}

inline std::vector<PauliTerm> decompose(const HMatrix& h, const DecomposeOptions& options = {}) {
  return decompose(h.matrix(), options);
}

/// sum_w alpha_w P_w as a dense matrix.
inline Eigen::MatrixXcd reconstruct(const std::vector<PauliTerm>& terms, int n_q) {
  if (n_q < 0 || n_q > 30) throw std::invalid_argument("reconstruct: n_q out of range");
  const auto dim = static_cast<Eigen::Index>(1) << n_q;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms) {
    if (static_cast<int>(t.word.size()) != n_q)
      throw std::invalid_argument("reconstruct: word '" + t.word + "' has length " + std::to_string(t.word.size()) +
                                  ", expected " + std::to_string(n_q));
    const PauliMasks m = pauli_masks(t.word);
    for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(dim); ++c)
      out(static_cast<Eigen::Index>(c ^ m.flip), static_cast<Eigen::Index>(c)) += t.coeff * m.phase(c);
  }
  return out;
}

/// `word coefficient` per line; complex coefficients are written as `re,im`.
inline void write_terms(std::ostream& os, const std::vector<PauliTerm>& terms) {
  for (const auto& t : terms) {
    os << t.word << ' ' << format_double(t.coeff.real());
    if (t.coeff.imag() != 0.0) os << ',' << format_double(t.coeff.imag());
    os << '\n';
  }
}

inline std::vector<PauliTerm> read_terms(std::istream& is) {
  std::vector<PauliTerm> terms;
  std::string line;
  std::size_t n_q = 0;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word, coeff;
    if (!(ls >> word >> coeff)) throw std::invalid_argument("terms line " + std::to_string(line_no) + ": malformed");
    if (!std::all_of(word.begin(), word.end(), is_pauli_letter))
      throw std::invalid_argument("terms line " + std::to_string(line_no) + ": invalid word '" + word + "'");
    if (terms.empty()) n_q = word.size();
    if (word.size() != n_q)
      throw std::invalid_argument("terms line " + std::to_string(line_no) + ": inconsistent word length");
    const auto comma = coeff.find(',');
    complex c = comma == std::string::npos
                    ? complex(parse_double(coeff), 0.0)
                    : complex(parse_double(coeff.substr(0, comma)), parse_double(coeff.substr(comma + 1)));
    terms.push_back({word, c});
  }
  return terms;
}

}  // namespace htqft
