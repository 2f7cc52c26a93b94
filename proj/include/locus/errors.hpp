#pragma once

#include <stdexcept>
#include <string>

namespace locus {

/// Contract violation: bad configuration, malformed input, out-of-range argument.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while computing on inputs that passed validation (e.g. a CDF that
/// never reaches the requested level).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace locus
