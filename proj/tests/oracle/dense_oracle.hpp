#pragma once

// Test-only reference constructions. Nothing here calls into the library's
// basis ranking, operator assembly or propagators.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

using Masks = std::vector<std::uint64_t>;

/// Every L-bit mask with N set bits, by brute force and sorting.
inline Masks enumerate_sorted(unsigned sites, unsigned particles) {
  Masks out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << sites); ++m) {
    if (static_cast<unsigned>(std::popcount(m)) == particles) out.push_back(m);
  }
  return out;  // already ascending
}

/// Annihilation operator c_i on the full 2^L single-species Fock space with
/// the Jordan-Wigner string over sites below i.
inline Eigen::MatrixXd annihilator(unsigned sites, unsigned i) {
  const auto dim = static_cast<Eigen::Index>(1) << sites;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    const auto mask = static_cast<std::uint64_t>(m);
    if (!((mask >> i) & 1u)) continue;
    const int below = std::popcount(mask & ((std::uint64_t{1} << i) - 1));
    c(static_cast<Eigen::Index>(mask ^ (std::uint64_t{1} << i)), m) = (below % 2) ? -1.0 : 1.0;
  }
  return c;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

struct Terms {
  bool tau_hopping, upsilon_hopping, tau_potential, upsilon_potential, cross;
};

inline constexpr Terms kFull{true, true, true, true, true};
inline constexpr Terms kTauStep{true, false, true, false, true};
inline constexpr Terms kUpsilonStep{false, true, false, true, true};

struct Params {
  double j_tau = 1.0;
  double j_upsilon = 1.0;
  std::vector<double> u_tau;
  std::vector<double> u_upsilon;
  double u_cross = 1.0;
};

/// Dense Hamiltonian on the (N_tau, N_upsilon) sector built term by term from
/// explicit creation and annihilation matrices: tau is the left tensor factor,
/// so full-space index = x * 2^L + y. Terms are added in the order tau hopping,
/// upsilon hopping, tau potential, upsilon potential, cross.
inline Eigen::MatrixXd hamiltonian(unsigned sites,
                                   const std::vector<std::pair<unsigned, unsigned>>& edges,
                                   const Params& p, unsigned n_tau, unsigned n_upsilon,
                                   Terms terms) {
  const auto single = static_cast<Eigen::Index>(1) << sites;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(single, single);
  std::vector<Eigen::MatrixXd> c, n;
  for (unsigned i = 0; i < sites; ++i) {
    c.push_back(annihilator(sites, i));
    n.push_back(c.back().transpose() * c.back());
  }
  const auto full_dim = single * single;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(full_dim, full_dim);
  if (terms.tau_hopping) {
    for (auto [i, j] : edges) {
      const Eigen::MatrixXd hopij = c[i].transpose() * c[j] + c[j].transpose() * c[i];
      h += p.j_tau * kron(hopij, id);
    }
  }
  if (terms.upsilon_hopping) {
    for (auto [i, j] : edges) {
      const Eigen::MatrixXd hopij = c[i].transpose() * c[j] + c[j].transpose() * c[i];
      h += p.j_upsilon * kron(id, hopij);
    }
  }
  if (terms.tau_potential) {
    for (unsigned i = 0; i < sites; ++i) h += p.u_tau[i] * kron(n[i], id);
  }
  if (terms.upsilon_potential) {
    for (unsigned i = 0; i < sites; ++i) h += p.u_upsilon[i] * kron(id, n[i]);
  }
  if (terms.cross) {
    for (unsigned i = 0; i < sites; ++i) h += p.u_cross * kron(n[i], n[i]);
  }

  const auto xs = enumerate_sorted(sites, n_tau);
  const auto ys = enumerate_sorted(sites, n_upsilon);
  std::vector<Eigen::Index> keep;
  for (auto x : xs) {
    for (auto y : ys) keep.push_back(static_cast<Eigen::Index>(x) * single + static_cast<Eigen::Index>(y));
  }
  const auto d = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd sector(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index col = 0; col < d; ++col) sector(r, col) = h(keep[r], keep[col]);
  }
  return sector;
}

/// exp(-i H t) via the spectral decomposition of a real symmetric H.
inline Eigen::MatrixXcd unitary(const Eigen::MatrixXd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  const Eigen::MatrixXcd q = eig.eigenvectors().cast<std::complex<double>>();
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phases[i] = std::polar(1.0, -eig.eigenvalues()[i] * t);
  return q * phases.asDiagonal() * q.adjoint();
}

inline Eigen::MatrixXcd unitary(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  const Eigen::MatrixXcd& q = eig.eigenvectors();
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phases[i] = std::polar(1.0, -eig.eigenvalues()[i] * t);
  return q * phases.asDiagonal() * q.adjoint();
}

/// Haar-random normalized vector (complex Gaussian, normalized).
inline Eigen::VectorXcd haar_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = {g(rng), g(rng)};
  return v / v.norm();
}

/// Von Neumann entropy of the reduced density matrix rho_tau = gamma gamma^dagger,
/// via its eigenvalues (not via singular values).
inline double reduced_density_entropy(const Eigen::VectorXcd& psi, Eigen::Index d_x,
                                      Eigen::Index d_y) {
  Eigen::MatrixXcd gamma(d_x, d_y);
  for (Eigen::Index m = 0; m < d_x; ++m) {
    for (Eigen::Index n = 0; n < d_y; ++n) gamma(m, n) = psi[m * d_y + n];
  }
  const Eigen::MatrixXcd rho = gamma * gamma.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double p = eig.eigenvalues()[i];
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

}  // namespace oracle
