#pragma once

#include <stdexcept>
#include <string>

namespace ta3n {

// Error taxonomy. The CLI maps each family onto a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or inconsistent flag combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing, unlabeled, or malformed data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Failures reading or writing files that are not format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ta3n
