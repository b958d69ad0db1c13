#include <set>

#include <gtest/gtest.h>

#include "oracle/dense_oracle.hpp"
#include "tsim/fock_basis.hpp"

using tsim::FockBasis;
using tsim::Mask;

TEST(FockBasis, DimensionMatchesBinomial) {
  EXPECT_EQ(FockBasis(4, 2).dim(), 6u);
  EXPECT_EQ(tsim::binomial(63, 31), 916312070471295267ull);
}

TEST(FockBasis, VacuumHasSingleEmptyMask) {
  const FockBasis b(3, 0);
  ASSERT_EQ(b.dim(), 1u);
  EXPECT_EQ(b[0], 0u);
  EXPECT_EQ(tsim::mask_to_string(b[0], 3), "000");
}

TEST(FockBasis, SingleParticleOrder) {
  const FockBasis b(3, 1);
  ASSERT_EQ(b.dim(), 3u);
  EXPECT_EQ(tsim::mask_to_string(b[0], 3), "001");
  EXPECT_EQ(tsim::mask_to_string(b[1], 3), "010");
  EXPECT_EQ(tsim::mask_to_string(b[2], 3), "100");
}

TEST(FockBasis, RankMatchesEnumerateAndSortOracle) {
  const FockBasis b(4, 2);
  const auto expected = oracle::enumerate_sorted(4, 2);
  ASSERT_EQ(expected, (oracle::Masks{0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100}));
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(b.rank(expected[i]), i);
}

TEST(FockBasis, MinimalMaskHasRankZero) {
  for (unsigned n = 0; n <= 7; ++n) {
    const FockBasis b(7, n);
    EXPECT_EQ(b.rank(tsim::site_mask(n)), 0u);
  }
}

TEST(FockBasis, RoundTripL5N2) {
  const FockBasis b(5, 2);
  for (Mask c : b.configs()) EXPECT_EQ(b.unrank(b.rank(c)), c);
}

TEST(FockBasis, EnumerationPropertiesUpToEightSites) {
  for (unsigned l = 1; l <= 8; ++l) {
    for (unsigned n = 0; n <= l; ++n) {
      const FockBasis b(l, n);
      const auto expected = oracle::enumerate_sorted(l, n);
      ASSERT_EQ(b.dim(), tsim::binomial(l, n));
      ASSERT_EQ(std::vector<Mask>(b.configs().begin(), b.configs().end()), expected)
          << "L=" << l << " N=" << n;
      std::set<Mask> distinct(b.configs().begin(), b.configs().end());
      EXPECT_EQ(distinct.size(), b.dim());
      for (std::size_t i = 0; i < b.dim(); ++i) {
        EXPECT_EQ(std::popcount(b[i]), static_cast<int>(n));
        EXPECT_EQ(b.rank(b.unrank(i)), i);
      }
    }
  }
}

TEST(FockBasis, RankUsesCountingNotStorage) {
  // Rank of the maximal mask for a large basis without enumerating anything
  // beyond what the constructor stores.
  const FockBasis b(20, 3);
  EXPECT_EQ(b.rank(tsim::site_mask(20) & ~tsim::site_mask(17)), b.dim() - 1);
}

TEST(FockBasis, RejectsInvalidArguments) {
  EXPECT_THROW(FockBasis(4, 5), std::invalid_argument);
  EXPECT_THROW(FockBasis(0, 0), std::invalid_argument);
  EXPECT_THROW(FockBasis(64, 1), std::invalid_argument);
  const FockBasis b(4, 2);
  EXPECT_THROW(b.rank(0b0111), std::invalid_argument);    // wrong particle count
  EXPECT_THROW(b.rank(0b10001), std::invalid_argument);   // stray bit beyond L
  EXPECT_THROW(b.unrank(6), std::invalid_argument);
}

TEST(FockBasis, LargestWordSizedBasis) {
  const FockBasis b(63, 62);
  EXPECT_EQ(b.dim(), 63u);
  EXPECT_EQ(b.rank(b[62]), 62u);
}

TEST(CompositeIndex, Examples) {
  EXPECT_EQ(tsim::composite_index(2, 3, 4, 5), 13u);
  EXPECT_EQ(tsim::composite_index(0, 0, 4, 7), 0u);
  EXPECT_EQ(tsim::composite_index(3, 6, 4, 7), 4u * 7u - 1u);
}

TEST(CompositeIndex, BijectionOverGrid) {
  const std::size_t dx = 6, dy = 15;
  std::set<std::size_t> seen;
  for (std::size_t m = 0; m < dx; ++m) {
    for (std::size_t n = 0; n < dy; ++n) {
      const auto k = tsim::composite_index(m, n, dx, dy);
      EXPECT_LT(k, dx * dy);
      seen.insert(k);
      const auto back = tsim::split_composite(k, dx, dy);
      EXPECT_EQ(back.m, m);
      EXPECT_EQ(back.n, n);
    }
  }
  EXPECT_EQ(seen.size(), dx * dy);
}

TEST(CompositeIndex, RejectsOutOfRange) {
  EXPECT_THROW(tsim::composite_index(4, 0, 4, 5), std::invalid_argument);
  EXPECT_THROW(tsim::composite_index(0, 5, 4, 5), std::invalid_argument);
  EXPECT_THROW(tsim::split_composite(20, 4, 5), std::invalid_argument);
}
