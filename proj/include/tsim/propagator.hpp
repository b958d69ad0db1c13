#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "tsim/error.hpp"
#include "tsim/model.hpp"
#include "tsim/state.hpp"

namespace tsim {

struct PropagatorSettings {
  std::size_t dense_threshold = 512;  // dims strictly below use exact exponentiation
  double krylov_tol = 1e-10;          // error budget per evolve call
  std::size_t krylov_max_dim = 40;
  double substep_cap = 16.0;          // max |dt| * ||H|| per Krylov application
  unsigned threads = 1;               // worker threads for evolve_blockwise

  void validate() const {
    if (dense_threshold == 0 || krylov_max_dim == 0 || threads == 0 || !(substep_cap > 0.0)) {
      throw std::invalid_argument("PropagatorSettings: all settings must be positive");
    }
    if (!(krylov_tol >= 1e-14)) {
      throw std::invalid_argument("PropagatorSettings: krylov_tol must be >= 1e-14");
    }
  }
};

struct PropagationDiagnostics {
  std::size_t dense_applications = 0;
  std::size_t krylov_applications = 0;
  std::size_t substeps = 0;
  std::size_t max_subspace = 0;
  std::size_t blocks_propagated = 0;
  std::size_t blocks_skipped = 0;

  void merge(const PropagationDiagnostics& o) {
    dense_applications += o.dense_applications;
    krylov_applications += o.krylov_applications;
    substeps += o.substeps;
    max_subspace = std::max(max_subspace, o.max_subspace);
    blocks_propagated += o.blocks_propagated;
    blocks_skipped += o.blocks_skipped;
  }
};

namespace detail {

inline Eigen::VectorXcd expm_dense(const SparseMatrix& h, const Eigen::VectorXcd& v, double t) {
  const Eigen::MatrixXcd generator = Eigen::MatrixXcd(h) * std::complex<double>(0.0, -t);
  return generator.exp() * v;
}

/// exp(-i T dt) e_1 for a real symmetric tridiagonal T given by its diagonal
/// and off-diagonal.
inline Eigen::VectorXcd tridiagonal_exp_e1(const std::vector<double>& alpha,
                                           const std::vector<double>& beta, std::size_t m,
                                           double dt) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    t(ii, ii) = alpha[i];
    if (i + 1 < m) t(ii, ii + 1) = t(ii + 1, ii) = beta[i + 1];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("Krylov: tridiagonal eigendecomposition failed");
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  Eigen::VectorXcd phases(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::polar(1.0, -eig.eigenvalues()[i] * dt) * q(0, i);
  }
  return q.cast<std::complex<double>>() * phases;
}

/// Lanczos propagation with full reorthogonalization. Each substep grows the
/// subspace until the a-posteriori residual estimate
/// ||psi|| * beta_{m+1} * |[exp(-i T_m dt) e_1]_m| meets its share of the
/// tolerance; if the subspace cap is reached first the substep is halved.
inline Eigen::VectorXcd krylov_evolve(const SparseMatrix& h, Eigen::VectorXcd psi, double t,
                                      double norm_bound, const PropagatorSettings& settings,
                                      PropagationDiagnostics& diag) {
  const auto n = static_cast<std::size_t>(psi.size());
  const std::size_t cap = std::min(settings.krylov_max_dim, n);
  const double total = std::abs(t);
  const double direction = t < 0 ? -1.0 : 1.0;
  const double max_step = norm_bound > 0 ? settings.substep_cap / norm_bound : total;

  double remaining = total;
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cap));
  std::vector<double> alpha(cap + 1, 0.0);
  std::vector<double> beta(cap + 1, 0.0);
  ++diag.krylov_applications;

  while (remaining > 0.0) {
    double dt = std::min(remaining, max_step);
    const double beta0 = psi.norm();
    if (beta0 == 0.0) break;
    basis.col(0) = psi / beta0;

    std::size_t m = 0;
    bool converged = false;
    Eigen::VectorXcd coeffs;
    for (std::size_t j = 0; j < cap; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      Eigen::VectorXcd w = h * basis.col(jj);
      alpha[j] = basis.col(jj).dot(w).real();
      w -= alpha[j] * basis.col(jj);
      if (j > 0) w -= beta[j] * basis.col(jj - 1);
      for (int pass = 0; pass < 2; ++pass) {
        const auto head = basis.leftCols(jj + 1);
        w -= head * (head.adjoint() * w);
      }
      beta[j + 1] = w.norm();
      m = j + 1;
      coeffs = tridiagonal_exp_e1(alpha, beta, m, direction * dt);
      const bool exhausted = m == n || beta[j + 1] <= 1e-14 * std::max(1.0, norm_bound);
      const double err = beta0 * beta[j + 1] * std::abs(coeffs[jj]);
      if (exhausted || err <= settings.krylov_tol * dt / total) {
        converged = true;
        break;
      }
      if (j + 1 < cap) basis.col(jj + 1) = w / beta[j + 1];
    }

    for (int halvings = 0; !converged; ++halvings) {
      if (halvings > 60) {
        throw NumericalFailure("Krylov: no convergence at subspace cap " + std::to_string(cap) +
                               " (remaining time " + std::to_string(remaining) + ")");
      }
      dt *= 0.5;
      coeffs = tridiagonal_exp_e1(alpha, beta, m, direction * dt);
      const double err = beta0 * beta[m] * std::abs(coeffs[static_cast<Eigen::Index>(m - 1)]);
      converged = err <= settings.krylov_tol * dt / total;
    }

    psi = beta0 * (basis.leftCols(static_cast<Eigen::Index>(m)) * coeffs);
    diag.max_subspace = std::max(diag.max_subspace, m);
    ++diag.substeps;
    remaining = dt >= remaining ? 0.0 : remaining - dt;
  }
  return psi;
}

inline double norm_bound(const SparseMatrix& h) {
  double best = 0.0;
  for (std::ptrdiff_t r = 0; r < h.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(h, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

inline Eigen::VectorXcd propagate(const SparseMatrix& h, const Eigen::VectorXcd& v, double t,
                                  const PropagatorSettings& settings,
                                  PropagationDiagnostics& diag) {
  if (t == 0.0) return v;
  if (static_cast<std::size_t>(v.size()) < settings.dense_threshold) {
    ++diag.dense_applications;
    return expm_dense(h, v, t);
  }
  return krylov_evolve(h, v, t, norm_bound(h), settings, diag);
}

}  // namespace detail

/// exp(-i H t) |state>. Negative t runs the dynamics backwards, which is the
/// same as evolving under -H for |t|.
inline ManyBodyState evolve(const ManyBodyState& state, const SparseHermitianOperator& op,
                            double t, const PropagatorSettings& settings = {},
                            PropagationDiagnostics* diagnostics = nullptr) {
  settings.validate();
  if (op.dim() != state.dim()) {
    throw std::invalid_argument("evolve: operator dimension " + std::to_string(op.dim()) +
                                " does not match state dimension " +
                                std::to_string(state.dim()));
  }
  if (t == 0.0) return state;
  PropagationDiagnostics local;
  auto out = detail::propagate(op.matrix(), state.amplitudes(), t, settings, local);
  if (diagnostics) diagnostics->merge(local);
  return ManyBodyState::from_unitary_image(state.d_x(), state.d_y(), std::move(out));
}

/// Same as evolve, but propagates each tagged block on its own. Blocks own
/// disjoint amplitude slices, so they can be handed to separate threads.
inline ManyBodyState evolve_blockwise(const ManyBodyState& state,
                                      const SparseHermitianOperator& op, double t,
                                      const PropagatorSettings& settings = {},
                                      PropagationDiagnostics* diagnostics = nullptr) {
  settings.validate();
  if (!op.has_blocks()) {
    throw std::invalid_argument("evolve_blockwise: operator carries no block tags");
  }
  if (op.dim() != state.dim()) {
    throw std::invalid_argument("evolve_blockwise: operator dimension " +
                                std::to_string(op.dim()) + " does not match state dimension " +
                                std::to_string(state.dim()));
  }
  if (t == 0.0) return state;

  const auto& in = state.amplitudes();
  Eigen::VectorXcd out(in.size());
  const auto& blocks = op.blocks();

  auto run_range = [&](std::size_t first, std::size_t last, PropagationDiagnostics& diag) {
    for (std::size_t b = first; b < last; ++b) {
      const auto& tag = blocks[b];
      Eigen::VectorXcd local(static_cast<Eigen::Index>(tag.length));
      for (std::size_t i = 0; i < tag.length; ++i) {
        local[static_cast<Eigen::Index>(i)] = in[static_cast<Eigen::Index>(tag.index(i))];
      }
      if (local.isZero(0.0)) {
        ++diag.blocks_skipped;
      } else {
        local = detail::propagate(op.block_matrix(b), local, t, settings, diag);
        ++diag.blocks_propagated;
      }
      for (std::size_t i = 0; i < tag.length; ++i) {
        out[static_cast<Eigen::Index>(tag.index(i))] = local[static_cast<Eigen::Index>(i)];
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(settings.threads, blocks.size());
  std::vector<PropagationDiagnostics> per_worker(workers);
  if (workers <= 1) {
    run_range(0, blocks.size(), per_worker[0]);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (blocks.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t first = w * chunk;
        const std::size_t last = std::min(blocks.size(), first + chunk);
        if (first >= last) break;
        pool.emplace_back([&, first, last, w] {
          try {
            run_range(first, last, per_worker[w]);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  if (diagnostics) {
    for (const auto& d : per_worker) diagnostics->merge(d);
  }
  return ManyBodyState::from_unitary_image(state.d_x(), state.d_y(), std::move(out));
}

}  // namespace tsim
