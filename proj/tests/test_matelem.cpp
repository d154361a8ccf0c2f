#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "htqft/matelem.hpp"
#include <nlohmann/json.hpp>
#include "oracle.hpp"

using namespace htqft;

namespace {
const ModelParams headline = ModelParams::from_ratios(0.2, 8.0);
constexpr double xi0 = 1.17986524620734844379;  // sqrt(2 pi / (8 / sqrt(pi))), mpmath

FockState random_state(std::mt19937_64& rng, int n_max, int max_quanta) {
  std::uniform_int_distribution<int> mode(-n_max, n_max), count(0, max_quanta);
  FockState s;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    const int n = mode(rng);
    s.set(n, std::min(s.occupation(n) + 1, 4));
  }
  return s;
}
}  // namespace

TEST(ModeFactor, ExampleValues) {
  EXPECT_EQ(mode_factor(0.37, 0, 0), complex(1.0, 0.0));
  EXPECT_EQ(mode_factor(xi0, 0, 0), complex(1.0, 0.0));
  const complex f10 = mode_factor(xi0, 1, 0);
  EXPECT_EQ(f10.real(), 0.0);
  EXPECT_NEAR(f10.imag(), 1.17986524620734844, 1e-15);
  const complex f20 = mode_factor(xi0, 2, 0);
  EXPECT_NEAR(f20.real(), -0.984350621607651234, 1e-15);
  EXPECT_EQ(f20.imag(), 0.0);
  EXPECT_NEAR(mode_factor(xi0, 1, 1).real(), 1.0 - xi0 * xi0, 1e-15);
}

TEST(ModeFactor, MatchesLadderOperatorOracle) {
  for (double xi : {0.3, 0.8, 1.18, 1.6})
    for (int ro = 0; ro <= 6; ++ro)
      for (int ri = 0; ri <= 6; ++ri) {
        oracle::cplx ref{0.0, 0.0};
        for (int j = 0; j <= ri + 1; ++j)
          for (int jp = 0; jp <= ro + 1; ++jp)
            ref += std::pow(oracle::cplx(0.0, xi), j + jp) / (oracle::factorial(j) * oracle::factorial(jp)) *
                   oracle::four_operator_vev(ro, jp, j, ri);
        ref /= std::sqrt(oracle::factorial(ro) * oracle::factorial(ri));
        const complex f = mode_factor(xi, ro, ri);
        EXPECT_NEAR(std::abs(f - ref), 0.0, 1e-12 * std::max(1.0, std::abs(ref))) << ro << "," << ri;
        EXPECT_EQ(f, mode_factor(xi, ri, ro));
      }
}

TEST(ModeFactor, RejectsNegative) { EXPECT_THROW(mode_factor(1.0, -1, 0), std::invalid_argument); }

TEST(VElement, ExampleValues) {
  const ModeTable modes = build_mode_table(headline, 3);
  const auto vac = FockState::vacuum();
  // -2 c m M L with c = e^gamma / (4 pi), mpmath
  EXPECT_NEAR(v_element(vac, vac, headline, modes).real(), -0.255886135874697113, 1e-15);
  EXPECT_EQ(v_element(vac, vac, headline, modes).imag(), 0.0);
  EXPECT_EQ(v_element(FockState::from_modes({{0, 1}}), vac, headline, modes), complex(0.0, 0.0));
  for (double theta : {0.0, 0.4, 2.0})
    EXPECT_EQ(v_element(FockState::from_modes({{2, 1}}), FockState::from_modes({{1, 1}}), headline.with_theta(theta),
                        modes),
              complex(0.0, 0.0));
}

TEST(VElement, OutOfRangeMode) {
  const ModeTable modes = build_mode_table(headline, 1);
  EXPECT_THROW(v_element(FockState::from_modes({{2, 1}, {-2, 1}}), FockState::vacuum(), headline, modes),
               std::out_of_range);
}

TEST(VElement, SelectionRulesRandomPairs) {
  std::mt19937_64 rng(20240611);
  const ModeTable modes = build_mode_table(headline, 4);
  int momentum_violations = 0, parity_violations = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    const FockState a = random_state(rng, 4, 5), b = random_state(rng, 4, 5);
    const complex v = v_element(a, b, headline, modes);
    if (a.momentum_number() != b.momentum_number()) {
      ++momentum_violations;
      EXPECT_EQ(v, complex(0.0, 0.0));
      EXPECT_EQ(v_element(a, b, headline.with_theta(1.1), modes), complex(0.0, 0.0));
    } else if (a.parity() != b.parity()) {
      ++parity_violations;
      EXPECT_LE(std::abs(v), 1e-14);
    }
  }
  EXPECT_GT(momentum_violations, 1000);
  EXPECT_GT(parity_violations, 100);
}

TEST(VElement, PhaseStructureAndHermiticity) {
  std::mt19937_64 rng(7);
  const ModeTable modes = build_mode_table(headline, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    const FockState a = random_state(rng, 3, 4), b = random_state(rng, 3, 4);
    const complex v = v_element(a, b, headline, modes);
    const int d = a.total_quanta() - b.total_quanta();
    const complex rotated = v * i_pow(-d);
    EXPECT_LE(std::abs(rotated.imag()), 1e-12 * std::max(1.0, std::abs(v)));
    for (double theta : {0.0, 0.7}) {
      const ModelParams p = headline.with_theta(theta);
      EXPECT_EQ(v_element(a, b, p, modes), std::conj(v_element(b, a, p, modes)));
    }
  }
}

TEST(Assemble, FreeTheoryIsDiagonal) {
  const auto basis = enumerate_for_qubits(headline, 4, Sector::both);
  const HMatrix h = assemble(basis, headline.with_mass(0.0));
  for (Eigen::Index a = 0; a < h.dim(); ++a)
    for (Eigen::Index b = 0; b < h.dim(); ++b)
      EXPECT_EQ(h(a, b), a == b ? complex(basis.energy(static_cast<std::size_t>(a)), 0.0) : complex(0.0, 0.0));
}

TEST(Assemble, VacuumOnly) {
  const HMatrix h = assemble(enumerate_for_qubits(headline, 0, Sector::even), headline);
  ASSERT_EQ(h.dim(), 1);
  EXPECT_NEAR(h(0, 0).real(), -0.255886135874697113, 1e-15);
}

TEST(Assemble, ParityBlocksAndInvariants) {
  const auto basis = enumerate_for_qubits(headline, 5, Sector::both);
  const HMatrix h = assemble(basis, headline);
  const double scale = max_abs_entry(h.matrix());
  EXPECT_LE(hermiticity_defect(h.matrix()), 1e-12 * scale);
  EXPECT_LE(max_imag_entry(h.matrix()), 1e-12 * scale);
  for (Eigen::Index a = 0; a < h.dim(); ++a) {
    EXPECT_EQ(h(a, a).real() - h.interaction()(a, a).real(), basis.energy(static_cast<std::size_t>(a)));
    for (Eigen::Index b = 0; b < h.dim(); ++b)
      if (basis.state(static_cast<std::size_t>(a)).parity() != basis.state(static_cast<std::size_t>(b)).parity())
        EXPECT_EQ(h(a, b), complex(0.0, 0.0));
  }
}

TEST(Assemble, NonzeroThetaStaysHermitian) {
  const auto basis = enumerate_for_qubits(headline, 4, Sector::both);
  const HMatrix h = assemble(basis, headline.with_theta(0.6));
  EXPECT_LE(hermiticity_defect(h.matrix()), 1e-12 * max_abs_entry(h.matrix()));
  // theta breaks parity: some opposite-parity element is nonzero
  double cross = 0.0;
  for (Eigen::Index a = 0; a < h.dim(); ++a)
    for (Eigen::Index b = 0; b < h.dim(); ++b)
      if (basis.state(static_cast<std::size_t>(a)).parity() != basis.state(static_cast<std::size_t>(b)).parity())
        cross = std::max(cross, std::abs(h(a, b)));
  EXPECT_GT(cross, 1e-3);
}

TEST(Assemble, MatchesNestedSumOracle) {
  struct Case {
    Sector sector;
    double theta;
    bool zero_mode_delta;
  };
  for (const Case& c : {Case{Sector::even, 0.0, false}, Case{Sector::odd, 0.0, false}, Case{Sector::both, 0.0, false},
                        Case{Sector::both, 0.45, false}, Case{Sector::even, 0.0, true}}) {
    const ModelParams p = headline.with_theta(c.theta);
    const auto basis = enumerate_for_qubits(p, 4, c.sector);
    AssembleOptions opt;
    opt.vertex.zero_mode_delta = c.zero_mode_delta;
    const HMatrix h = assemble(basis, p, opt);
    double worst = 0.0;
    for (Eigen::Index a = 0; a < h.dim(); ++a)
      for (Eigen::Index b = 0; b < h.dim(); ++b) {
        const auto ref = oracle::v_element(basis.state(static_cast<std::size_t>(a)),
                                           basis.state(static_cast<std::size_t>(b)), p, c.zero_mode_delta);
        worst = std::max(worst, std::abs(h.interaction()(a, b) - ref));
      }
    EXPECT_LE(worst, 1e-12) << to_string(c.sector) << " theta=" << c.theta << " delta=" << c.zero_mode_delta;
  }
}

TEST(Assemble, LinearInMass) {
  const auto basis = enumerate_for_qubits(headline, 4, Sector::even);
  const HMatrix h1 = assemble(basis, headline.with_mass(0.15));
  const HMatrix h2 = assemble(basis, headline.with_mass(0.30));
  EXPECT_LE((h2.interaction() - 2.0 * h1.interaction()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assemble, ZeroModeDeltaForbidsZeroModeChanges) {
  const auto basis = enumerate_for_qubits(headline, 3, Sector::even);
  AssembleOptions opt;
  opt.vertex.zero_mode_delta = true;
  const HMatrix h = assemble(basis, headline, opt);
  for (Eigen::Index a = 0; a < h.dim(); ++a)
    for (Eigen::Index b = 0; b < h.dim(); ++b)
      if (basis.state(static_cast<std::size_t>(a)).occupation(0) != basis.state(static_cast<std::size_t>(b)).occupation(0))
        EXPECT_EQ(h.interaction()(a, b), complex(0.0, 0.0));
}

TEST(Assemble, WorkerCountDoesNotChangeBits) {
  const auto basis = enumerate_for_qubits(headline, 6, Sector::even);
  const HMatrix serial = assemble(basis, headline);
  AssembleOptions opt;
  opt.workers = 4;
  const HMatrix parallel = assemble(basis, headline, opt);
  EXPECT_TRUE((serial.matrix().array() == parallel.matrix().array()).all());
}

TEST(Assemble, RejectsMismatchedParameters) {
  const auto basis = enumerate_for_qubits(headline, 2, Sector::even);
  EXPECT_THROW(assemble(basis, ModelParams::from_ratios(0.2, 9.0)), std::invalid_argument);
  EXPECT_THROW(assemble(TruncatedBasis{}, headline), std::invalid_argument);
}

TEST(MatrixDump, HeaderAndRows) {
  const auto basis = enumerate_for_qubits(headline, 2, Sector::even);
  const HMatrix h = assemble(basis, headline);
  std::ostringstream os;
  write_matrix_dump(os, h, headline);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  const auto header = nlohmann::json::parse(line);
  EXPECT_EQ(header["dim"], 4);
  EXPECT_EQ(header["params"]["L"], 8.0);
  EXPECT_EQ(header["basis_checksum"], basis_checksum(basis));
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
  }
  EXPECT_EQ(rows, 4);
}
