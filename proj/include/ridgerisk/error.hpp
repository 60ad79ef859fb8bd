#pragma once

#include <stdexcept>
#include <string>

namespace ridgerisk {

/// Raised when an input violates an operation's preconditions.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a well-formed input leads to a numerically meaningless result
/// (rank-deficient kernel at tau = 0, degenerate fixed-point denominator).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ridgerisk
