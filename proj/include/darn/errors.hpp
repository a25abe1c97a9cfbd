#pragma once

#include <stdexcept>

namespace darn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Vector/matrix sizes that do not line up, or an (Architecture, ModelParams)
// pair that fails the shape check.
struct DimensionError : Error {
  using Error::Error;
};

// Exact enumeration requested for a representation too large to enumerate.
struct EnumerationGuardError : Error {
  using Error::Error;
};

// Malformed or out-of-range input data (IDX, CSV, checkpoints, intensities).
struct DataError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required (e.g. gradients).
struct NumericError : Error {
  using Error::Error;
};

// Bad command line, architecture string or configuration.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace darn
