#pragma once

#include <stdexcept>
#include <string>

namespace laf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the function (e.g. set element not in [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Embedding index out of range.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or infinity.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (IDX, JSON, CSV, cache files).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Run record written by an incompatible schema version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Missing file or failed read/write.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-facing configuration or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace laf
