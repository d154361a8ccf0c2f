#pragma once

// Physical parameters of the bosonised massive Schwinger model on a circle
// and the single-mode quantities derived from them.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace htqft {

class ModelParams {
public:
  /// Couplings in absolute units: g and m share mass dimension, L is a length.
  ModelParams(double g, double m, double length, double theta = 0.0)
      : g_(g), m_(m), length_(length), theta_(theta) {
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::invalid_argument("coupling g must be positive, got " + std::to_string(g));
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("circle length L must be positive, got " + std::to_string(length));
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("fermion mass m must be non-negative, got " + std::to_string(m));
    if (!std::isfinite(theta))
      throw std::invalid_argument("theta must be finite");
    scalar_mass_ = g_ / std::sqrt(std::numbers::pi);
  }

  /// Units of g = 1: takes the dimensionless ratios m/g and g*L.
  static ModelParams from_ratios(double m_over_g, double gL, double theta = 0.0) {
    return ModelParams(1.0, m_over_g, gL, theta);
  }

  double g() const { return g_; }
  double m() const { return m_; }
  double length() const { return length_; }
  double theta() const { return theta_; }

  /// M = g / sqrt(pi).
  double scalar_mass() const { return scalar_mass_; }

  /// c = e^gamma / (4 pi), the normal-ordering coefficient of the cosine term.
  static double normal_ordering_coefficient() {
    return std::exp(std::numbers::egamma) / (4.0 * std::numbers::pi);
  }

  /// Overall prefactor c * m * M * L of each vertex term in V.
  double vertex_prefactor() const {
    return normal_ordering_coefficient() * m_ * scalar_mass_ * length_;
  }

  ModelParams with_mass(double m) const { return ModelParams(g_, m, length_, theta_); }
  ModelParams with_theta(double theta) const { return ModelParams(g_, m_, length_, theta); }

private:
  double g_;
  double m_;
  double length_;
  double theta_;
  double scalar_mass_;
};

inline double mode_momentum(const ModelParams& p, int n) {
  return 2.0 * std::numbers::pi * static_cast<double>(n) / p.length();
}

inline double mode_energy(const ModelParams& p, int n) {
  const double k = mode_momentum(p, n);
  const double mass = p.scalar_mass();
  return std::sqrt(k * k + mass * mass);
}

struct ModeEntry {
  int n = 0;
  double momentum = 0.0;
  double energy = 0.0;
  /// sqrt(2 pi / (L E_n)), the coefficient of a_n and a_n^dagger in the vertex operator.
  double xi = 0.0;
};

/// Modes n in [-n_max, n_max]. Stored by n + n_max.
class ModeTable {
public:
  ModeTable() = default;
  ModeTable(const ModelParams& p, int n_max) : n_max_(n_max), length_(p.length()), mass_(p.scalar_mass()) {
    if (n_max < 0)
      throw std::invalid_argument("mode table needs n_max >= 0, got " + std::to_string(n_max));
    entries_.reserve(2 * static_cast<std::size_t>(n_max) + 1);
    for (int n = -n_max; n <= n_max; ++n) {
      ModeEntry e;
      e.n = n;
      e.momentum = mode_momentum(p, n);
      e.energy = mode_energy(p, std::abs(n));
      e.xi = std::sqrt(2.0 * std::numbers::pi / (p.length() * e.energy));
      entries_.push_back(e);
    }
  }

  int n_max() const { return n_max_; }
  std::size_t size() const { return entries_.size(); }
  double length() const { return length_; }
  double scalar_mass() const { return mass_; }

  bool contains(int n) const { return n >= -n_max_ && n <= n_max_; }

  const ModeEntry& at(int n) const {
    if (!contains(n))
      throw std::out_of_range("mode n = " + std::to_string(n) + " outside table range |n| <= " +
                              std::to_string(n_max_));
    return entries_[static_cast<std::size_t>(n + n_max_)];
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

private:
  int n_max_ = -1;
  double length_ = 0.0;
  double mass_ = 0.0;
  std::vector<ModeEntry> entries_;
};

inline ModeTable build_mode_table(const ModelParams& p, int n_max) { return ModeTable(p, n_max); }

/// Largest |n| with E_n <= e_max, or -1 if even the zero mode is above the cutoff.
inline int max_mode_below(const ModelParams& p, double e_max) {
  if (mode_energy(p, 0) > e_max) return -1;
  int n = 0;
  while (mode_energy(p, n + 1) <= e_max) ++n;
  return n;
}

}  // namespace htqft
