#pragma once

#include <stdexcept>

namespace sqz {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Odd N: the annihilation condition has no nonzero solution in the
// symmetric sector, so no dark state exists there.
struct OddEnsembleError : Error {
  using Error::Error;
};

// Full product-space construction above the configured atom cap.
struct CapacityError : Error {
  using Error::Error;
};

// Operator set and state built over different bases.
struct BasisMismatchError : Error {
  using Error::Error;
};

// <Sz> numerically zero: the phase sensitivity is undefined.
struct DegenerateError : Error {
  using Error::Error;
};

// Integration failure (step-size underflow, positivity loss).
struct IntegrationError : Error {
  using Error::Error;
};

// Malformed run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace sqz
