#pragma once

#include <stdexcept>
#include <string>

namespace qsvm {

/// Caller broke a documented precondition (dimension mismatch, bad parameter).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem exceeds a configured size bound (enumeration limit, simulator
/// register, lattice window).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed or unusable input data (CSV cells, single-class sets, documents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace qsvm
