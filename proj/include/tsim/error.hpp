#pragma once

#include <stdexcept>
#include <string>

namespace tsim {

/// Raised when a numerical routine cannot reach its requested accuracy
/// (Krylov non-convergence, failed decompositions).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsim
