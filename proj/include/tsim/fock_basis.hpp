#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsim {

using Mask = std::uint64_t;

inline constexpr unsigned kMaxSites = 63;

namespace detail {

// Pascal triangle up to 64; every entry with n <= 63 fits in 64 bits.
inline constexpr auto kBinomial = [] {
  std::array<std::array<std::uint64_t, 65>, 65> table{};
  for (std::size_t n = 0; n <= 64; ++n) {
    table[n][0] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      table[n][k] = table[n - 1][k - 1] + (k <= n - 1 ? table[n - 1][k] : 0);
    }
  }
  return table;
}();

}  // namespace detail

constexpr std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n || n > 64) return 0;
  return detail::kBinomial[n][k];
}

/// Mask with the low `sites` bits set.
constexpr Mask site_mask(unsigned sites) {
  return sites >= 64 ? ~Mask{0} : (Mask{1} << sites) - 1;
}

constexpr bool occupied(Mask mask, unsigned site) { return (mask >> site) & 1u; }

/// Binary string of the low `sites` bits, site 0 rightmost.
inline std::string mask_to_string(Mask mask, unsigned sites) {
  std::string out(sites, '0');
  for (unsigned i = 0; i < sites; ++i) {
    if (occupied(mask, i)) out[sites - 1 - i] = '1';
  }
  return out;
}

/// Fixed-particle-number basis of spinless fermion configurations on L sites.
///
/// Configurations are stored in ascending unsigned order; bit i is site i.
/// rank() uses the combinatorial number system, so it needs no search:
/// rank(mask) = sum_j C(p_j, j) over the ascending set-bit positions p_1 < ... < p_N.
class FockBasis {
 public:
  FockBasis(unsigned sites, unsigned particles) : sites_(sites), particles_(particles) {
    if (sites == 0 || sites > kMaxSites) {
      throw std::invalid_argument("FockBasis: sites must be in [1, 63], got " +
                                  std::to_string(sites));
    }
    if (particles > sites) {
      throw std::invalid_argument("FockBasis: particles (" + std::to_string(particles) +
                                  ") exceed sites (" + std::to_string(sites) + ")");
    }
    const auto dim = binomial(sites, particles);
    configs_.reserve(static_cast<std::size_t>(dim));
    if (particles == 0) {
      configs_.push_back(0);
      return;
    }
    // Gosper's hack walks the N-bit masks in increasing order.
    Mask mask = site_mask(particles);
    const Mask limit = site_mask(sites);
    while (true) {
      configs_.push_back(mask);
      if (configs_.size() == dim) break;
      const Mask lowest = mask & (~mask + 1);
      const Mask ripple = mask + lowest;
      mask = (((ripple ^ mask) >> 2) / lowest) | ripple;
      if (mask > limit) break;
    }
  }

  unsigned sites() const noexcept { return sites_; }
  unsigned particles() const noexcept { return particles_; }
  std::size_t dim() const noexcept { return configs_.size(); }
  std::span<const Mask> configs() const noexcept { return configs_; }

  bool contains(Mask mask) const noexcept {
    return (mask & ~site_mask(sites_)) == 0 &&
           static_cast<unsigned>(std::popcount(mask)) == particles_;
  }

  std::size_t rank(Mask mask) const {
    if (!contains(mask)) {
      throw std::invalid_argument("FockBasis::rank: mask " + mask_to_string(mask, 64) +
                                  " is not a member of the (L=" + std::to_string(sites_) +
                                  ", N=" + std::to_string(particles_) + ") basis");
    }
    std::uint64_t r = 0;
    unsigned j = 1;
    while (mask != 0) {
      const auto p = static_cast<unsigned>(std::countr_zero(mask));
      r += binomial(p, j++);
      mask &= mask - 1;
    }
    return static_cast<std::size_t>(r);
  }

  Mask unrank(std::size_t index) const {
    if (index >= configs_.size()) {
      throw std::invalid_argument("FockBasis::unrank: index " + std::to_string(index) +
                                  " out of range [0, " + std::to_string(configs_.size()) + ")");
    }
    return configs_[index];
  }

  Mask operator[](std::size_t index) const noexcept { return configs_[index]; }

 private:
  unsigned sites_;
  unsigned particles_;
  std::vector<Mask> configs_;
};

inline FockBasis enumerate_basis(unsigned sites, unsigned particles) {
  return FockBasis(sites, particles);
}

/// (m, n) address into the composite tau x upsilon basis.
struct CompositeIndex {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  friend bool operator==(const CompositeIndex&, const CompositeIndex&) = default;
};

/// Flat index k = m * d_y + n.
inline std::size_t composite_index(std::size_t m, std::size_t n, std::size_t d_x,
                                   std::size_t d_y) {
  if (m >= d_x || n >= d_y) {
    throw std::invalid_argument("composite_index: (" + std::to_string(m) + ", " +
                                std::to_string(n) + ") outside " + std::to_string(d_x) + "x" +
                                std::to_string(d_y));
  }
  return m * d_y + n;
}

inline CompositeIndex split_composite(std::size_t k, std::size_t d_x, std::size_t d_y) {
  if (d_y == 0 || k >= d_x * d_y) {
    throw std::invalid_argument("split_composite: flat index " + std::to_string(k) +
                                " out of range");
  }
  return {k / d_y, k % d_y, k};
}

}  // namespace tsim
