#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsim/fock_basis.hpp"

namespace tsim {

using RowMajorMatrixXcd = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>;

inline constexpr double kNormTolerance = 1e-12;

/// Normalized amplitude vector over the composite tau x upsilon basis,
/// flat index k = m * d_y + n.
class ManyBodyState {
 public:
  ManyBodyState() = default;

  /// Validating constructor for externally supplied amplitudes.
  ManyBodyState(std::size_t d_x, std::size_t d_y, Eigen::VectorXcd amplitudes)
      : d_x_(d_x), d_y_(d_y), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != d_x * d_y) {
      throw std::invalid_argument("ManyBodyState: expected " + std::to_string(d_x * d_y) +
                                  " amplitudes, got " + std::to_string(amplitudes_.size()));
    }
    if (!amplitudes_.allFinite() || std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
      throw std::invalid_argument("ManyBodyState: amplitudes are not normalized");
    }
  }

  /// Wraps amplitudes produced by a norm-preserving operation without re-checking.
  static ManyBodyState from_unitary_image(std::size_t d_x, std::size_t d_y,
                                          Eigen::VectorXcd amplitudes) {
    ManyBodyState s;
    s.d_x_ = d_x;
    s.d_y_ = d_y;
    s.amplitudes_ = std::move(amplitudes);
    return s;
  }

  static ManyBodyState basis_state(std::size_t d_x, std::size_t d_y, std::size_t m,
                                   std::size_t n) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d_x * d_y));
    amps[static_cast<Eigen::Index>(composite_index(m, n, d_x, d_y))] = 1.0;
    return from_unitary_image(d_x, d_y, std::move(amps));
  }

  std::size_t d_x() const noexcept { return d_x_; }
  std::size_t d_y() const noexcept { return d_y_; }
  std::size_t dim() const noexcept { return d_x_ * d_y_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

  std::complex<double> amplitude(std::size_t m, std::size_t n) const {
    return amplitudes_[static_cast<Eigen::Index>(composite_index(m, n, d_x_, d_y_))];
  }

  /// The d_x x d_y coefficient matrix gamma(m, n), viewed in place.
  Eigen::Map<const RowMajorMatrixXcd> gamma() const {
    return {amplitudes_.data(), static_cast<Eigen::Index>(d_x_), static_cast<Eigen::Index>(d_y_)};
  }

  friend bool operator==(const ManyBodyState& a, const ManyBodyState& b) {
    return a.d_x_ == b.d_x_ && a.d_y_ == b.d_y_ && a.amplitudes_ == b.amplitudes_;
  }

 private:
  std::size_t d_x_ = 0;
  std::size_t d_y_ = 0;
  Eigen::VectorXcd amplitudes_;
};

}  // namespace tsim
