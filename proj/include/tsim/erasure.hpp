#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsim/fock_basis.hpp"
#include "tsim/model.hpp"
#include "tsim/state.hpp"

namespace tsim {

enum class ErasureKind { none, random_phase, site_phase };

inline const char* to_string(ErasureKind k) {
  switch (k) {
    case ErasureKind::none: return "none";
    case ErasureKind::random_phase: return "random_phase";
    case ErasureKind::site_phase: return "site_phase";
  }
  return "?";
}

/// Template for the erasure applied once per cycle. Random-phase erasure
/// draws its phases per cycle from (master seed, cycle index); site-phase
/// erasure uses the fixed `theta` on `site`.
struct ErasureOperation {
  ErasureKind kind = ErasureKind::random_phase;
  Species species = Species::upsilon;
  unsigned site = 0;
  double theta = 0.0;
  bool alternate_species = false;  // flip the target species on odd cycles

  Species species_for_cycle(std::uint64_t cycle) const {
    return alternate_species && (cycle % 2 == 1) ? other(species) : species;
  }

  friend bool operator==(const ErasureOperation&, const ErasureOperation&) = default;
};

/// Multiplies every composite amplitude by e^{i theta_j}, where j indexes the
/// configuration of `species`: columns of gamma for upsilon, rows for tau.
inline ManyBodyState apply_random_phases(const ManyBodyState& state, Species species,
                                         const std::vector<double>& phases) {
  const auto d = species == Species::tau ? state.d_x() : state.d_y();
  if (phases.size() != d) {
    throw std::invalid_argument("apply_random_phases: expected " + std::to_string(d) +
                                " phases for " + to_string(species) + ", got " +
                                std::to_string(phases.size()));
  }
  std::vector<std::complex<double>> factors(d);
  for (std::size_t j = 0; j < d; ++j) factors[j] = std::polar(1.0, phases[j]);

  Eigen::VectorXcd out = state.amplitudes();
  for (std::size_t m = 0; m < state.d_x(); ++m) {
    for (std::size_t n = 0; n < state.d_y(); ++n) {
      out[static_cast<Eigen::Index>(m * state.d_y() + n)] *=
          factors[species == Species::tau ? m : n];
    }
  }
  return ManyBodyState::from_unitary_image(state.d_x(), state.d_y(), std::move(out));
}

/// Phase sequence theta_j = theta * n_site(config_j) for a species basis.
inline std::vector<double> site_phase_sequence(const FockBasis& basis, unsigned site,
                                               double theta) {
  if (site >= basis.sites()) {
    throw std::invalid_argument("site_phase: site " + std::to_string(site) + " outside [0, " +
                                std::to_string(basis.sites()) + ")");
  }
  std::vector<double> phases(basis.dim(), 0.0);
  for (std::size_t j = 0; j < basis.dim(); ++j) {
    if (occupied(basis[j], site)) phases[j] = theta;
  }
  return phases;
}

/// Multiplies by e^{i theta} every amplitude whose `species` configuration
/// occupies `site`.
inline ManyBodyState apply_site_phase(const ManyBodyState& state, const FockBasis& basis,
                                      Species species, unsigned site, double theta) {
  return apply_random_phases(state, species, site_phase_sequence(basis, site, theta));
}

/// Reproducible phases uniform on [0, 2 pi) for one cycle. The engine is
/// seeded from (master_seed, cycle) through std::seed_seq and the doubles are
/// formed from the top 53 bits, so the sequence is identical on every
/// conforming standard library.
inline std::vector<double> draw_phases(std::uint64_t master_seed, std::uint64_t cycle,
                                       std::size_t d) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(cycle), static_cast<std::uint32_t>(cycle >> 32),
                    0x7473696du};
  std::mt19937_64 engine(seq);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> phases(d);
  for (auto& theta : phases) {
    theta = static_cast<double>(engine() >> 11) * 0x1.0p-53 * two_pi;
    if (theta >= two_pi) theta = std::nextafter(two_pi, 0.0);
  }
  return phases;
}

}  // namespace tsim
