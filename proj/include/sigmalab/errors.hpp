#pragma once

#include <stdexcept>
#include <string>

namespace sigmalab {

/// Argument outside the mathematical domain of an operation (k > n, l >= k, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The request is well-posed but beyond what this implementation supports
/// (jet degree too low, dimension too large for the combinatorial route).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate geometric input, e.g. a metric that is not positive definite.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stated precondition of a formula does not hold (non-Einstein background, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two routes that must agree did not.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite-difference estimate failed its own stability test.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit over a sample grid left residuals above its tolerance.
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigmalab
