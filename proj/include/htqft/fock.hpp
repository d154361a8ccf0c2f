#pragma once

// Zero-momentum bosonic Fock basis below an H0 energy cutoff.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htqft/format.hpp"
#include "htqft/model.hpp"

namespace htqft {

enum class Sector { even, odd, both };

inline std::string to_string(Sector s) {
  switch (s) {
    case Sector::even: return "even";
    case Sector::odd: return "odd";
    case Sector::both: return "both";
  }
  return "?";
}

inline Sector parse_sector(const std::string& s) {
  if (s == "even") return Sector::even;
  if (s == "odd") return Sector::odd;
  if (s == "both") return Sector::both;
  throw std::invalid_argument("unknown sector '" + s + "' (expected even, odd or both)");
}

inline bool sector_admits(Sector s, int parity) {
  return s == Sector::both || (s == Sector::even) == (parity > 0);
}

/// Canonical mode order is 0, 1, -1, 2, -2, ...; slot(n) is the position of n in it.
constexpr std::size_t canonical_slot(int n) {
  return n > 0 ? static_cast<std::size_t>(2 * n - 1) : static_cast<std::size_t>(-2 * n);
}

constexpr int mode_of_slot(std::size_t slot) {
  return slot % 2 == 1 ? static_cast<int>((slot + 1) / 2) : -static_cast<int>(slot / 2);
}

/// Occupation numbers r_n over modes, stored densely in canonical slot order
/// with trailing zeros trimmed, so comparison is the canonical lexicographic order.
class FockState {
public:
  using Occupation = std::uint8_t;

  FockState() = default;

  static FockState vacuum() { return FockState(); }

  static FockState from_modes(std::initializer_list<std::pair<int, int>> occupations) {
    return from_modes(std::vector<std::pair<int, int>>(occupations));
  }

  static FockState from_modes(const std::vector<std::pair<int, int>>& occupations) {
    FockState s;
    for (auto [n, r] : occupations) s.set(n, r);
    return s;
  }

  static FockState from_slots(std::vector<Occupation> slots) {
    FockState s;
    s.slots_ = std::move(slots);
    s.refresh();
    return s;
  }

  void set(int n, int r) {
    if (r < 0) throw std::invalid_argument("negative occupation for mode " + std::to_string(n));
    if (r > 255) throw std::invalid_argument("occupation above 255 for mode " + std::to_string(n));
    const std::size_t slot = canonical_slot(n);
    if (slot >= slots_.size()) {
      if (r == 0) return;
      slots_.resize(slot + 1, 0);
    }
    slots_[slot] = static_cast<Occupation>(r);
    refresh();
  }

  int occupation(int n) const {
    const std::size_t slot = canonical_slot(n);
    return slot < slots_.size() ? slots_[slot] : 0;
  }

  const std::vector<Occupation>& slots() const { return slots_; }
  bool is_vacuum() const { return slots_.empty(); }
  int total_quanta() const { return quanta_; }
  int momentum_number() const { return momentum_; }
  int parity() const { return quanta_ % 2 == 0 ? 1 : -1; }

  /// Largest |n| with nonzero occupation (0 for the vacuum).
  int max_abs_mode() const {
    return slots_.empty() ? 0 : std::abs(mode_of_slot(slots_.size() - 1));
  }

  /// Calls f(n, r_n) for each occupied mode in canonical order.
  template <typename F>
  void for_each_occupied(F&& f) const {
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s] != 0) f(mode_of_slot(s), static_cast<int>(slots_[s]));
  }

  /// "{n:r,...}" in canonical mode order.
  std::string label() const {
    std::string out = "{";
    bool first = true;
    for_each_occupied([&](int n, int r) {
      if (!first) out += ',';
      first = false;
      out += std::to_string(n) + ":" + std::to_string(r);
    });
    return out + "}";
  }

  friend bool operator==(const FockState& a, const FockState& b) { return a.slots_ == b.slots_; }
  friend auto operator<=>(const FockState& a, const FockState& b) { return a.slots_ <=> b.slots_; }

private:
  void refresh() {
    while (!slots_.empty() && slots_.back() == 0) slots_.pop_back();
    quanta_ = 0;
    momentum_ = 0;
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      quanta_ += slots_[s];
      momentum_ += mode_of_slot(s) * slots_[s];
    }
  }

  std::vector<Occupation> slots_;
  int quanta_ = 0;
  int momentum_ = 0;
};

inline int momentum_number(const FockState& s) { return s.momentum_number(); }
inline int parity(const FockState& s) { return s.parity(); }

/// Sum r_n E_n, accumulated over |n| ascending with r_n + r_{-n} combined, so
/// mirror-image states get bitwise identical energies.
inline double h0_energy(const FockState& s, const ModeTable& modes) {
  if (s.max_abs_mode() > modes.n_max())
    throw std::out_of_range("state " + s.label() + " occupies mode " + std::to_string(s.max_abs_mode()) +
                            " outside mode table |n| <= " + std::to_string(modes.n_max()));
  double e = 0.0;
  for (int n = 0; n <= s.max_abs_mode(); ++n) {
    const int r = n == 0 ? s.occupation(0) : s.occupation(n) + s.occupation(-n);
    if (r != 0) e += r * modes.at(n).energy;
  }
  return e;
}

class TruncatedBasis {
public:
  TruncatedBasis() = default;

  TruncatedBasis(ModeTable modes, std::vector<FockState> states, std::vector<double> energies, double e_max,
                 Sector sector, int momentum = 0)
      : modes_(std::move(modes)),
        states_(std::move(states)),
        energies_(std::move(energies)),
        e_max_(e_max),
        sector_(sector),
        momentum_(momentum) {
    if (states_.size() != energies_.size()) throw std::invalid_argument("basis: states/energies size mismatch");
    rebuild_index();
  }

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const FockState& state(std::size_t i) const { return states_.at(i); }
  const std::vector<FockState>& states() const { return states_; }
  double energy(std::size_t i) const { return energies_.at(i); }
  const std::vector<double>& energies() const { return energies_; }
  const ModeTable& modes() const { return modes_; }
  double e_max() const { return e_max_; }
  Sector sector() const { return sector_; }
  int momentum() const { return momentum_; }
  std::optional<int> n_q() const { return n_q_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::optional<std::size_t> index_of(const FockState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Basis with the first `count` states; used by truncate_to_qubits.
  TruncatedBasis prefix(std::size_t count) const {
    TruncatedBasis out(modes_, std::vector<FockState>(states_.begin(), states_.begin() + static_cast<long>(count)),
                       std::vector<double>(energies_.begin(), energies_.begin() + static_cast<long>(count)), e_max_,
                       sector_, momentum_);
    out.warnings_ = warnings_;
    return out;
  }

  void set_n_q(int n_q) { n_q_ = n_q; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  ModeTable modes_;
  std::vector<FockState> states_;
  std::vector<double> energies_;
  std::map<FockState, std::size_t> index_;
  double e_max_ = 0.0;
  Sector sector_ = Sector::even;
  int momentum_ = 0;
  std::optional<int> n_q_;
  std::vector<std::string> warnings_;
};

namespace detail {

struct Enumerator {
  const ModeTable& modes;
  double e_max;
  int target_momentum;
  Sector sector;
  std::vector<int> order;  // modes by ascending energy: 0, 1, -1, 2, -2, ...
  double dk;
  std::vector<FockState::Occupation> slots;
  std::vector<FockState> found;

  static constexpr double slack = 1e-12;

  void run(std::size_t depth, double remaining, int momentum) {
    if (remaining < -slack) return;
    // every remaining quantum carries at most E_n of |k_n|
    if (std::abs(target_momentum - momentum) * dk > remaining + slack * (1.0 + e_max)) return;
    if (depth == order.size()) {
      if (momentum == target_momentum) found.push_back(FockState::from_slots(slots));
      return;
    }
    const int n = order[depth];
    const double e = modes.at(n).energy;
    const std::size_t slot = canonical_slot(n);
    const int r_max = static_cast<int>(std::floor((remaining + slack * (1.0 + e_max)) / e));
    for (int r = 0; r <= std::min(r_max, 255); ++r) {
      slots[slot] = static_cast<FockState::Occupation>(r);
      run(depth + 1, remaining - r * e, momentum + n * r);
    }
    slots[slot] = 0;
  }
};

inline void sort_canonical(std::vector<FockState>& states, std::vector<double>& energies) {
  std::vector<std::size_t> idx(states.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (energies[a] != energies[b]) return energies[a] < energies[b];
    return states[a] < states[b];
  });
  std::vector<FockState> s;
  std::vector<double> e;
  s.reserve(idx.size());
  e.reserve(idx.size());
  for (auto i : idx) {
    s.push_back(std::move(states[i]));
    e.push_back(energies[i]);
  }
  states = std::move(s);
  energies = std::move(e);
}

}  // namespace detail

/// All states of the requested parity sector and momentum with H0 energy <= e_max,
/// ordered by energy with ties broken lexicographically in canonical mode order.
inline TruncatedBasis enumerate_basis(const ModelParams& p, double e_max, Sector sector, int momentum = 0) {
  if (!(e_max > 0.0) || !std::isfinite(e_max))
    throw std::invalid_argument("enumerate_basis: e_max must be positive, got " + std::to_string(e_max));
  const int n_max = std::max(0, max_mode_below(p, e_max));
  ModeTable modes(p, n_max);

  detail::Enumerator en{modes, e_max, momentum, sector, {}, 2.0 * std::numbers::pi / p.length(), {}, {}};
  if (max_mode_below(p, e_max) >= 0) {
    en.order.push_back(0);
    for (int n = 1; n <= n_max; ++n) {
      en.order.push_back(n);
      en.order.push_back(-n);
    }
  }
  en.slots.assign(2 * static_cast<std::size_t>(n_max) + 1, 0);
  en.run(0, e_max, 0);

  std::vector<FockState> states;
  std::vector<double> energies;
  for (auto& s : en.found) {
    if (!sector_admits(sector, s.parity())) continue;
    const double e = h0_energy(s, modes);
    if (e > e_max) continue;
    energies.push_back(e);
    states.push_back(std::move(s));
  }
  detail::sort_canonical(states, energies);
  return TruncatedBasis(std::move(modes), std::move(states), std::move(energies), e_max, sector, momentum);
}

/// Energies closer than this are treated as one degenerate level when checking truncation boundaries.
inline bool nearly_degenerate(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline TruncatedBasis truncate_to_qubits(const TruncatedBasis& basis, int n_q) {
  if (n_q < 0 || n_q > 20) throw std::invalid_argument("n_q must lie in [0, 20], got " + std::to_string(n_q));
  const std::size_t required = std::size_t{1} << n_q;
  if (basis.size() < required)
    throw std::runtime_error("basis holds " + std::to_string(basis.size()) + " states but 2^" + std::to_string(n_q) +
                             " = " + std::to_string(required) + " are required; raise e_max");
  TruncatedBasis out = basis.prefix(required);
  out.set_n_q(n_q);
  if (required < basis.size() && nearly_degenerate(basis.energy(required - 1), basis.energy(required)))
    out.add_warning("truncation to 2^" + std::to_string(n_q) + " states splits a degenerate level at H0 energy " +
                    format_double(basis.energy(required)));
  return out;
}

/// Raises e_max geometrically by 1.5 until the sector holds at least 2^n_q states, then truncates.
inline TruncatedBasis enumerate_for_qubits(const ModelParams& p, int n_q, Sector sector, int momentum = 0) {
  if (n_q < 0 || n_q > 20) throw std::invalid_argument("n_q must lie in [0, 20], got " + std::to_string(n_q));
  const std::size_t required = std::size_t{1} << n_q;
  double e_max = p.scalar_mass();
  for (int iter = 0; iter < 200; ++iter) {
    TruncatedBasis b = enumerate_basis(p, e_max, sector, momentum);
    if (b.size() >= required) return truncate_to_qubits(b, n_q);
    e_max *= 1.5;
  }
  throw std::runtime_error("enumerate_for_qubits: cutoff growth did not reach 2^" + std::to_string(n_q) + " states");
}

/// CSV dump: header, then `index,energy,parity,"{n:r,...}"` per state.
inline void write_basis_dump(std::ostream& os, const TruncatedBasis& basis) {
  os << "index,energy,parity,occupations\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& s = basis.state(i);
    os << i << ',' << format_double(basis.energy(i)) << ',' << (s.parity() > 0 ? "+1" : "-1") << ",\""
       << s.label() << "\"\n";
  }
}

inline std::string basis_dump(const TruncatedBasis& basis) {
  std::ostringstream os;
  write_basis_dump(os, basis);
  return os.str();
}

inline std::string basis_checksum(const TruncatedBasis& basis) { return hex64(fnv1a64(basis_dump(basis))); }

}  // namespace htqft
