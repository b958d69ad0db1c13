#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracle/dense_oracle.hpp"
#include "tsim/erasure.hpp"
#include "tsim/observables.hpp"

namespace {

using tsim::FockBasis;
using tsim::ManyBodyState;
using tsim::Species;

ManyBodyState haar(std::size_t d_x, std::size_t d_y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ManyBodyState(d_x, d_y, oracle::haar_vector(static_cast<Eigen::Index>(d_x * d_y), rng));
}

double max_dev(const ManyBodyState& a, const ManyBodyState& b) {
  return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(RandomPhases, ZeroPhasesAreIdentity) {
  const auto psi = haar(15, 15, 1);
  EXPECT_EQ(tsim::apply_random_phases(psi, Species::upsilon, std::vector<double>(15, 0.0)), psi);
  EXPECT_EQ(tsim::apply_random_phases(psi, Species::tau, std::vector<double>(15, 0.0)), psi);
}

TEST(RandomPhases, UpsilonMultipliesColumnsTauMultipliesRows) {
  const auto psi = haar(3, 4, 2);
  const std::vector<double> by_col{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> by_row{1.0, 2.0, 3.0};
  const auto u = tsim::apply_random_phases(psi, Species::upsilon, by_col);
  const auto t = tsim::apply_random_phases(psi, Species::tau, by_row);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_NEAR(std::abs(u.amplitude(m, n) - std::polar(1.0, by_col[n]) * psi.amplitude(m, n)),
                  0.0, 1e-15);
      EXPECT_NEAR(std::abs(t.amplitude(m, n) - std::polar(1.0, by_row[m]) * psi.amplitude(m, n)),
                  0.0, 1e-15);
    }
  }
}

TEST(RandomPhases, PreservesMagnitudesEntropiesAndSchmidtSpectrum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto psi = haar(15, 15, 100 + seed);
    for (auto species : {Species::upsilon, Species::tau}) {
      const auto out = tsim::apply_random_phases(psi, species, tsim::draw_phases(seed, 1, 15));
      EXPECT_NEAR(out.norm(), 1.0, 1e-15);
      EXPECT_LE((out.amplitudes().cwiseAbs() - psi.amplitudes().cwiseAbs()).cwiseAbs().maxCoeff(),
                1e-15);
      const auto a = tsim::shannon_entropies(psi);
      const auto b = tsim::shannon_entropies(out);
      EXPECT_NEAR(a.tau, b.tau, 1e-14);
      EXPECT_NEAR(a.upsilon, b.upsilon, 1e-14);
      EXPECT_NEAR(a.total, b.total, 1e-14);
      EXPECT_LE((tsim::schmidt_spectrum(psi) - tsim::schmidt_spectrum(out)).cwiseAbs().maxCoeff(),
                1e-12);
    }
  }
}

TEST(RandomPhases, ConjugatePhasesRestoreInput) {
  const auto psi = haar(15, 15, 3);
  auto phases = tsim::draw_phases(42, 7, 15);
  const auto once = tsim::apply_random_phases(psi, Species::upsilon, phases);
  for (auto& p : phases) p = -p;
  EXPECT_LE(max_dev(tsim::apply_random_phases(once, Species::upsilon, phases), psi), 1e-15);
}

TEST(RandomPhases, RejectsWrongLength) {
  const auto psi = haar(3, 4, 4);
  EXPECT_THROW(tsim::apply_random_phases(psi, Species::upsilon, std::vector<double>(3)),
               std::invalid_argument);
  EXPECT_THROW(tsim::apply_random_phases(psi, Species::tau, std::vector<double>(4)),
               std::invalid_argument);
}

TEST(SitePhase, IdentityAtZeroAndFullTurn) {
  const FockBasis by(6, 2);
  const auto psi = haar(15, 15, 5);
  EXPECT_EQ(tsim::apply_site_phase(psi, by, Species::upsilon, 3, 0.0), psi);
  EXPECT_LE(max_dev(tsim::apply_site_phase(psi, by, Species::upsilon, 3, 2 * std::numbers::pi), psi),
            1e-15);
}

TEST(SitePhase, MatchesOccupancyDerivedSequence) {
  const FockBasis by(6, 2);
  const auto psi = haar(15, 15, 6);
  const double theta = 0.9;
  std::vector<double> phases(by.dim());
  for (std::size_t n = 0; n < by.dim(); ++n) phases[n] = ((by[n] >> 2) & 1u) ? theta : 0.0;
  EXPECT_EQ(tsim::apply_site_phase(psi, by, Species::upsilon, 2, theta),
            tsim::apply_random_phases(psi, Species::upsilon, phases));
  // Site 2 is occupied in exactly L - 1 = 5 of the 15 two-particle configurations.
  EXPECT_EQ(std::count(phases.begin(), phases.end(), theta), 5);
}

TEST(SitePhase, CommutesWithRandomPhases) {
  const FockBasis by(6, 2);
  const auto psi = haar(15, 15, 7);
  const auto phases = tsim::draw_phases(3, 2, 15);
  const auto ab = tsim::apply_random_phases(
      tsim::apply_site_phase(psi, by, Species::upsilon, 4, 1.3), Species::upsilon, phases);
  const auto ba = tsim::apply_site_phase(
      tsim::apply_random_phases(psi, Species::upsilon, phases), by, Species::upsilon, 4, 1.3);
  EXPECT_LE(max_dev(ab, ba), 1e-15);
}

TEST(SitePhase, RejectsSiteOutOfRange) {
  const FockBasis by(6, 2);
  const auto psi = haar(15, 15, 8);
  EXPECT_THROW(tsim::apply_site_phase(psi, by, Species::upsilon, 6, 1.0), std::invalid_argument);
}

TEST(DrawPhases, DeterministicInRangeAndCycleDependent) {
  const auto a = tsim::draw_phases(12345, 3, 400);
  EXPECT_EQ(a, tsim::draw_phases(12345, 3, 400));
  const auto b = tsim::draw_phases(12345, 4, 400);
  const auto c = tsim::draw_phases(12346, 3, 400);
  std::size_t same_b = 0;
  std::size_t same_c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a[i], 0.0);
    EXPECT_LT(a[i], 2 * std::numbers::pi);
    same_b += a[i] == b[i];
    same_c += a[i] == c[i];
  }
  EXPECT_EQ(same_b, 0u);
  EXPECT_EQ(same_c, 0u);
}

TEST(DrawPhases, PrefixStableAcrossLengths) {
  const auto short_seq = tsim::draw_phases(9, 1, 10);
  const auto long_seq = tsim::draw_phases(9, 1, 100);
  EXPECT_TRUE(std::equal(short_seq.begin(), short_seq.end(), long_seq.begin()));
}

TEST(DrawPhases, RoughlyUniform) {
  std::vector<int> bins(8, 0);
  for (std::uint64_t cycle = 1; cycle <= 100; ++cycle) {
    for (double theta : tsim::draw_phases(77, cycle, 80)) {
      ++bins[static_cast<std::size_t>(theta / (2 * std::numbers::pi) * 8)];
    }
  }
  // 8000 draws, expected 1000 per bin, sd about 30.
  for (int count : bins) EXPECT_NEAR(count, 1000, 150);
}

TEST(ErasureOperation, AlternatesSpeciesOnlyWhenEnabled) {
  tsim::ErasureOperation op;
  EXPECT_EQ(op.species_for_cycle(1), Species::upsilon);
  EXPECT_EQ(op.species_for_cycle(2), Species::upsilon);
  op.alternate_species = true;
  EXPECT_EQ(op.species_for_cycle(1), Species::tau);
  EXPECT_EQ(op.species_for_cycle(2), Species::upsilon);
}
