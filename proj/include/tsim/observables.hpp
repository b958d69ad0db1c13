#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tsim/error.hpp"
#include "tsim/fock_basis.hpp"
#include "tsim/model.hpp"
#include "tsim/state.hpp"

namespace tsim {

/// Probabilities at or below this are dropped from entropy sums (0 ln 0 = 0).
inline constexpr double kProbabilityFloor = 1e-300;

struct ShannonEntropies {
  double tau = 0.0;
  double upsilon = 0.0;
  double total = 0.0;
};

struct EntropyReport {
  double s_tau = 0.0;
  double s_upsilon = 0.0;
  double s_total = 0.0;
  double s_ent = 0.0;
  std::vector<double> densities_tau;
  std::vector<double> densities_upsilon;
  double fidelity_to_initial = 1.0;
};

namespace detail {

inline double entropy_term(double p) { return p > kProbabilityFloor ? -p * std::log(p) : 0.0; }

}  // namespace detail

/// Shannon entropies (nats) of the tau marginal, upsilon marginal and joint
/// distribution |gamma(m, n)|^2.
template <typename Derived>
ShannonEntropies shannon_entropies(const Eigen::MatrixBase<Derived>& gamma) {
  const Eigen::MatrixXd p = gamma.cwiseAbs2();
  ShannonEntropies s;
  for (Eigen::Index m = 0; m < p.rows(); ++m) s.tau += detail::entropy_term(p.row(m).sum());
  for (Eigen::Index n = 0; n < p.cols(); ++n) s.upsilon += detail::entropy_term(p.col(n).sum());
  for (Eigen::Index m = 0; m < p.rows(); ++m) {
    for (Eigen::Index n = 0; n < p.cols(); ++n) s.total += detail::entropy_term(p(m, n));
  }
  // A marginal of 1 + eps would otherwise give -eps.
  s.tau = std::max(s.tau, 0.0);
  s.upsilon = std::max(s.upsilon, 0.0);
  s.total = std::max(s.total, 0.0);
  return s;
}

inline ShannonEntropies shannon_entropies(const ManyBodyState& state) {
  return shannon_entropies(state.gamma());
}

/// Singular values of gamma in descending order.
template <typename Derived>
Eigen::VectorXd schmidt_spectrum(const Eigen::MatrixBase<Derived>& gamma) {
  const Eigen::BDCSVD<Eigen::MatrixXcd> svd{Eigen::MatrixXcd(gamma)};
  if (svd.info() != Eigen::Success) {
    throw NumericalFailure("schmidt_spectrum: SVD failed");
  }
  return svd.singularValues();
}

inline Eigen::VectorXd schmidt_spectrum(const ManyBodyState& state) {
  return schmidt_spectrum(state.gamma());
}

/// Von Neumann entropy of the Schmidt spectrum across the tau|upsilon cut.
template <typename Derived>
double entanglement_entropy(const Eigen::MatrixBase<Derived>& gamma) {
  const Eigen::VectorXd sigma = schmidt_spectrum(gamma);
  double s = 0.0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) s += detail::entropy_term(sigma[k] * sigma[k]);
  return std::max(s, 0.0);
}

inline double entanglement_entropy(const ManyBodyState& state) {
  return entanglement_entropy(state.gamma());
}

/// <n_i> for every site of `species`; `basis` must be that species' basis.
inline std::vector<double> occupation_density(const ManyBodyState& state, const FockBasis& basis,
                                              Species species) {
  const auto d = species == Species::tau ? state.d_x() : state.d_y();
  if (basis.dim() != d) {
    throw std::invalid_argument("occupation_density: basis dimension does not match state");
  }
  const Eigen::MatrixXd p = state.gamma().cwiseAbs2();
  std::vector<double> density(basis.sites(), 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double weight = species == Species::tau ? p.row(jj).sum() : p.col(jj).sum();
    for (unsigned i = 0; i < basis.sites(); ++i) {
      if (occupied(basis[j], i)) density[i] += weight;
    }
  }
  return density;
}

/// |<a|b>|^2.
inline double fidelity(const ManyBodyState& a, const ManyBodyState& b) {
  if (a.dim() != b.dim() || a.d_x() != b.d_x()) {
    throw std::invalid_argument("fidelity: state dimensions differ");
  }
  return std::min(1.0, std::norm(a.amplitudes().dot(b.amplitudes())));
}

/// <psi|H|psi>.
inline double expectation(const ManyBodyState& state, const SparseHermitianOperator& op) {
  return state.amplitudes().dot(op.apply(state.amplitudes())).real();
}

inline EntropyReport make_report(const ManyBodyState& state, const FockBasis& basis_tau,
                                 const FockBasis& basis_upsilon, const ManyBodyState& initial) {
  const auto s = shannon_entropies(state);
  EntropyReport r;
  r.s_tau = s.tau;
  r.s_upsilon = s.upsilon;
  r.s_total = s.total;
  r.s_ent = entanglement_entropy(state);
  r.densities_tau = occupation_density(state, basis_tau, Species::tau);
  r.densities_upsilon = occupation_density(state, basis_upsilon, Species::upsilon);
  r.fidelity_to_initial = fidelity(initial, state);
  return r;
}

}  // namespace tsim
