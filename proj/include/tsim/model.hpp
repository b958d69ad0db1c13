#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tsim/fock_basis.hpp"

namespace tsim {

using Complex = std::complex<double>;

enum class Species { tau, upsilon };

inline const char* to_string(Species s) { return s == Species::tau ? "tau" : "upsilon"; }

inline Species other(Species s) { return s == Species::tau ? Species::upsilon : Species::tau; }

/// Site count plus an undirected nearest-neighbour bond list.
struct LatticeSpec {
  unsigned sites = 0;
  std::vector<std::pair<unsigned, unsigned>> edges;

  static LatticeSpec chain(unsigned sites) {
    LatticeSpec lattice{sites, {}};
    for (unsigned i = 0; i + 1 < sites; ++i) lattice.edges.emplace_back(i, i + 1);
    return lattice;
  }

  void validate() const {
    if (sites == 0 || sites > kMaxSites) {
      throw std::invalid_argument("LatticeSpec: sites must be in [1, 63]");
    }
    std::set<std::pair<unsigned, unsigned>> seen;
    for (const auto& [a, b] : edges) {
      if (a >= sites || b >= sites) {
        throw std::invalid_argument("LatticeSpec: edge (" + std::to_string(a) + ", " +
                                    std::to_string(b) + ") has an endpoint outside [0, " +
                                    std::to_string(sites) + ")");
      }
      if (a == b) {
        throw std::invalid_argument("LatticeSpec: self-loop at site " + std::to_string(a));
      }
      if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
        throw std::invalid_argument("LatticeSpec: duplicate edge (" + std::to_string(a) + ", " +
                                    std::to_string(b) + ")");
      }
    }
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

struct ModelParams {
  double j_tau = 1.0;
  double j_upsilon = 1.0;
  std::vector<double> u_tau;      // U_{i,tau}, one per site
  std::vector<double> u_upsilon;  // U_{i,upsilon}, one per site
  double u_cross = 1.0;           // on-site tau-upsilon density-density coupling

  static ModelParams defaults(unsigned sites) {
    ModelParams p;
    p.u_tau.assign(sites, 0.0);
    p.u_upsilon.assign(sites, 0.0);
    return p;
  }

  const std::vector<double>& potential(Species s) const {
    return s == Species::tau ? u_tau : u_upsilon;
  }
  double hopping(Species s) const { return s == Species::tau ? j_tau : j_upsilon; }

  void validate(unsigned sites) const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (u_tau.size() != sites || u_upsilon.size() != sites) {
      throw std::invalid_argument("ModelParams: potential sequences must have length " +
                                  std::to_string(sites));
    }
    if (!finite(j_tau) || !finite(j_upsilon) || !finite(u_cross) ||
        !std::all_of(u_tau.begin(), u_tau.end(), finite) ||
        !std::all_of(u_upsilon.begin(), u_upsilon.end(), finite)) {
      throw std::invalid_argument("ModelParams: all couplings must be finite");
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Per-site potential felt by the mobile `species` when the other species is frozen
/// in `frozen_mask`: the species' own potential plus U_cross on every occupied site.
inline std::vector<double> effective_potential(Mask frozen_mask, const ModelParams& params,
                                               Species species) {
  const auto& base = params.potential(species);
  const auto sites = static_cast<unsigned>(base.size());
  if ((frozen_mask & ~site_mask(sites)) != 0) {
    throw std::invalid_argument("effective_potential: mask has bits beyond site " +
                                std::to_string(sites - 1));
  }
  std::vector<double> v(base);
  for (unsigned i = 0; i < sites; ++i) {
    if (occupied(frozen_mask, i)) v[i] += params.u_cross;
  }
  return v;
}

/// Result of c_i^dagger c_j acting on `mask` (i != j) under the fixed site
/// ordering: the target mask and the Jordan-Wigner sign, or sign 0 if the
/// move is blocked.
struct HopResult {
  Mask target = 0;
  int sign = 0;
};

constexpr HopResult hop(Mask mask, unsigned to, unsigned from) {
  if (!occupied(mask, from) || occupied(mask, to)) return {};
  const unsigned lo = std::min(to, from);
  const unsigned hi = std::max(to, from);
  const Mask between = site_mask(hi) & ~site_mask(lo + 1);
  const int parity = std::popcount(mask & between) & 1;
  return {mask ^ ((Mask{1} << to) | (Mask{1} << from)), parity ? -1 : 1};
}

/// Contiguous-or-strided slice of the flat index space on which an operator
/// acts independently. Indices are start + i * stride for i in [0, length).
struct BlockTag {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t stride = 1;
  Mask frozen_config = 0;

  std::size_t index(std::size_t local) const noexcept { return start + local * stride; }
  friend bool operator==(const BlockTag&, const BlockTag&) = default;
};

struct OperatorEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  Complex value{};
  friend bool operator==(const OperatorEntry&, const OperatorEntry&) = default;
};

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, std::ptrdiff_t>;

/// Hermitian operator stored as a full (both triangles) coordinate list,
/// optionally tagged with a block-diagonal partition of the index space.
class SparseHermitianOperator {
 public:
  SparseHermitianOperator() = default;

  SparseHermitianOperator(std::size_t dim, std::vector<OperatorEntry> entries,
                          std::vector<BlockTag> blocks = {})
      : dim_(dim), entries_(std::move(entries)), blocks_(std::move(blocks)) {
    normalize_entries();
    if (!is_hermitian()) {
      throw std::invalid_argument("SparseHermitianOperator: entries are not Hermitian");
    }
    matrix_ = to_sparse(dim_, entries_);
    if (!blocks_.empty()) index_blocks();
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<OperatorEntry>& entries() const noexcept { return entries_; }
  const std::vector<BlockTag>& blocks() const noexcept { return blocks_; }
  bool has_blocks() const noexcept { return !blocks_.empty(); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }

  /// Block-local matrix of block b (local indices 0..length-1).
  const SparseMatrix& block_matrix(std::size_t b) const { return block_matrices_.at(b); }

  Eigen::MatrixXcd to_dense() const { return Eigen::MatrixXcd(matrix_); }

  /// Block-diagonal view expanded back to a flat coordinate list.
  std::vector<OperatorEntry> expand_blocks() const {
    std::vector<OperatorEntry> out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& tag = blocks_[b];
      const auto& local = block_matrices_[b];
      for (std::ptrdiff_t r = 0; r < local.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(local, r); it; ++it) {
          out.push_back({tag.index(static_cast<std::size_t>(it.row())),
                         tag.index(static_cast<std::size_t>(it.col())), it.value()});
        }
      }
    }
    sort_entries(out);
    return out;
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != dim_) {
      throw std::invalid_argument("SparseHermitianOperator::apply: dimension mismatch");
    }
    return matrix_ * v;
  }

  /// Max absolute row sum; bounds the spectral norm.
  double norm_bound() const {
    std::vector<double> rows(dim_, 0.0);
    for (const auto& e : entries_) rows[e.row] += std::abs(e.value);
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
  }

  bool is_hermitian() const {
    std::vector<OperatorEntry> transposed;
    transposed.reserve(entries_.size());
    for (const auto& e : entries_) transposed.push_back({e.col, e.row, std::conj(e.value)});
    sort_entries(transposed);
    return transposed == entries_;
  }

  /// `dim nnz` header then `row col re im` per entry, 17 significant digits.
  void write_coordinate_list(std::ostream& os) const {
    const auto old_precision = os.precision(17);
    os << dim_ << ' ' << entries_.size() << '\n';
    for (const auto& e : entries_) {
      os << e.row << ' ' << e.col << ' ' << e.value.real() << ' ' << e.value.imag() << '\n';
    }
    os.precision(old_precision);
  }

 private:
  static void sort_entries(std::vector<OperatorEntry>& v) {
    std::sort(v.begin(), v.end(), [](const OperatorEntry& a, const OperatorEntry& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
  }

  void normalize_entries() {
    for (const auto& e : entries_) {
      if (e.row >= dim_ || e.col >= dim_) {
        throw std::invalid_argument("SparseHermitianOperator: entry (" + std::to_string(e.row) +
                                    ", " + std::to_string(e.col) + ") outside dimension " +
                                    std::to_string(dim_));
      }
    }
    sort_entries(entries_);
    std::vector<OperatorEntry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
        merged.back().value += e.value;
      } else {
        merged.push_back(e);
      }
    }
    std::erase_if(merged, [](const OperatorEntry& e) { return e.value == Complex{}; });
    entries_ = std::move(merged);
  }

  static SparseMatrix to_sparse(std::size_t dim, const std::vector<OperatorEntry>& entries) {
    std::vector<Eigen::Triplet<Complex, std::ptrdiff_t>> triplets;
    triplets.reserve(entries.size());
    for (const auto& e : entries) {
      triplets.emplace_back(static_cast<std::ptrdiff_t>(e.row), static_cast<std::ptrdiff_t>(e.col),
                            e.value);
    }
    SparseMatrix m(static_cast<std::ptrdiff_t>(dim), static_cast<std::ptrdiff_t>(dim));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
  }

  void index_blocks() {
    constexpr auto kUnassigned = static_cast<std::size_t>(-1);
    std::vector<std::size_t> owner(dim_, kUnassigned);
    std::vector<std::size_t> local(dim_, 0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& tag = blocks_[b];
      if (tag.length == 0 || tag.stride == 0) {
        throw std::invalid_argument("SparseHermitianOperator: empty or zero-stride block");
      }
      for (std::size_t i = 0; i < tag.length; ++i) {
        const auto k = tag.index(i);
        if (k >= dim_ || owner[k] != kUnassigned) {
          throw std::invalid_argument("SparseHermitianOperator: blocks do not partition [0, dim)");
        }
        owner[k] = b;
        local[k] = i;
      }
    }
    if (std::find(owner.begin(), owner.end(), kUnassigned) != owner.end()) {
      throw std::invalid_argument("SparseHermitianOperator: blocks do not cover [0, dim)");
    }
    std::vector<std::vector<OperatorEntry>> per_block(blocks_.size());
    for (const auto& e : entries_) {
      if (owner[e.row] != owner[e.col]) {
        throw std::invalid_argument("SparseHermitianOperator: entry couples distinct blocks");
      }
      per_block[owner[e.row]].push_back({local[e.row], local[e.col], e.value});
    }
    block_matrices_.reserve(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      block_matrices_.push_back(to_sparse(blocks_[b].length, per_block[b]));
    }
  }

  std::size_t dim_ = 0;
  std::vector<OperatorEntry> entries_;
  std::vector<BlockTag> blocks_;
  SparseMatrix matrix_;
  std::vector<SparseMatrix> block_matrices_;
};

/// Which pieces of the two-species Hamiltonian to assemble.
struct HamiltonianTerms {
  bool tau_hopping = false;
  bool upsilon_hopping = false;
  bool tau_potential = false;
  bool upsilon_potential = false;
  bool cross = false;

  static constexpr HamiltonianTerms full() { return {true, true, true, true, true}; }
  static constexpr HamiltonianTerms tau_step() { return {true, false, true, false, true}; }
  static constexpr HamiltonianTerms upsilon_step() { return {false, true, false, true, true}; }
  static constexpr HamiltonianTerms cross_only() { return {false, false, false, false, true}; }
};

namespace detail {

inline void check_inputs(const LatticeSpec& lattice, const ModelParams& params,
                         const FockBasis& basis_tau, const FockBasis& basis_upsilon) {
  lattice.validate();
  if (basis_tau.sites() != lattice.sites || basis_upsilon.sites() != lattice.sites) {
    throw std::invalid_argument("model: basis site count does not match lattice (" +
                                std::to_string(lattice.sites) + " sites)");
  }
  params.validate(lattice.sites);
}

}  // namespace detail

/// Assemble the selected terms on the composite basis k = m * d_y + n.
///
/// Hopping is J (c_i^dagger c_j + c_j^dagger c_i) per bond with the
/// Jordan-Wigner sign taken within each species; the two species are treated
/// as distinguishable, so no sign crosses between them. Diagonal terms are
/// accumulated in a fixed order: tau potential, upsilon potential, cross term,
/// each over ascending sites.
inline SparseHermitianOperator build_terms(const LatticeSpec& lattice, const ModelParams& params,
                                           const FockBasis& basis_tau,
                                           const FockBasis& basis_upsilon,
                                           HamiltonianTerms terms,
                                           std::vector<BlockTag> blocks = {}) {
  detail::check_inputs(lattice, params, basis_tau, basis_upsilon);
  const auto d_x = basis_tau.dim();
  const auto d_y = basis_upsilon.dim();
  const unsigned sites = lattice.sites;
  std::vector<OperatorEntry> entries;

  for (std::size_t m = 0; m < d_x; ++m) {
    const Mask x = basis_tau[m];
    for (std::size_t n = 0; n < d_y; ++n) {
      const Mask y = basis_upsilon[n];
      const auto k = m * d_y + n;

      double diagonal = 0.0;
      for (unsigned i = 0; i < sites && terms.tau_potential; ++i) {
        if (occupied(x, i)) diagonal += params.u_tau[i];
      }
      for (unsigned i = 0; i < sites && terms.upsilon_potential; ++i) {
        if (occupied(y, i)) diagonal += params.u_upsilon[i];
      }
      for (unsigned i = 0; i < sites && terms.cross; ++i) {
        if (occupied(x, i) && occupied(y, i)) diagonal += params.u_cross;
      }
      if (diagonal != 0.0) entries.push_back({k, k, diagonal});

      for (const auto& [a, b] : lattice.edges) {
        for (const auto& [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
          if (terms.tau_hopping && params.j_tau != 0.0) {
            if (const auto h = hop(x, to, from); h.sign != 0) {
              entries.push_back({basis_tau.rank(h.target) * d_y + n, k, h.sign * params.j_tau});
            }
          }
          if (terms.upsilon_hopping && params.j_upsilon != 0.0) {
            if (const auto h = hop(y, to, from); h.sign != 0) {
              entries.push_back(
                  {m * d_y + basis_upsilon.rank(h.target), k, h.sign * params.j_upsilon});
            }
          }
        }
      }
    }
  }
  return SparseHermitianOperator(d_x * d_y, std::move(entries), std::move(blocks));
}

/// Full two-species Hamiltonian: both hoppings, both potentials, cross term.
inline SparseHermitianOperator build_full(const LatticeSpec& lattice, const ModelParams& params,
                                          const FockBasis& basis_tau,
                                          const FockBasis& basis_upsilon) {
  return build_terms(lattice, params, basis_tau, basis_upsilon, HamiltonianTerms::full());
}

/// tau-mobile step: tau hopping, tau potential, cross term. Block n holds the
/// tau sector with upsilon frozen in y_n (indices n, n + d_y, n + 2 d_y, ...).
inline SparseHermitianOperator build_h1(const LatticeSpec& lattice, const ModelParams& params,
                                        const FockBasis& basis_tau,
                                        const FockBasis& basis_upsilon) {
  std::vector<BlockTag> blocks;
  blocks.reserve(basis_upsilon.dim());
  for (std::size_t n = 0; n < basis_upsilon.dim(); ++n) {
    blocks.push_back({n, basis_tau.dim(), basis_upsilon.dim(), basis_upsilon[n]});
  }
  return build_terms(lattice, params, basis_tau, basis_upsilon, HamiltonianTerms::tau_step(),
                     std::move(blocks));
}

/// upsilon-mobile step: upsilon hopping, upsilon potential, cross term. Block m
/// is the contiguous range [m d_y, (m + 1) d_y) with tau frozen in x_m.
inline SparseHermitianOperator build_h2(const LatticeSpec& lattice, const ModelParams& params,
                                        const FockBasis& basis_tau,
                                        const FockBasis& basis_upsilon) {
  std::vector<BlockTag> blocks;
  blocks.reserve(basis_tau.dim());
  for (std::size_t m = 0; m < basis_tau.dim(); ++m) {
    blocks.push_back({m * basis_upsilon.dim(), basis_upsilon.dim(), 1, basis_tau[m]});
  }
  return build_terms(lattice, params, basis_tau, basis_upsilon, HamiltonianTerms::upsilon_step(),
                     std::move(blocks));
}

/// Entry-wise sum of two operators on the same space, without block tags.
inline SparseHermitianOperator add_operators(const SparseHermitianOperator& a,
                                             const SparseHermitianOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("add_operators: dimensions differ");
  std::vector<OperatorEntry> entries(a.entries().begin(), a.entries().end());
  entries.insert(entries.end(), b.entries().begin(), b.entries().end());
  return SparseHermitianOperator(a.dim(), std::move(entries));
}

}  // namespace tsim
