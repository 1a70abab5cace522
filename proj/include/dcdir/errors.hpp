#pragma once

#include <stdexcept>
#include <string>

namespace dcdir {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shape disagreement; message names the operation and the shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Mathematically invalid input (empty softmax, empty max-pool, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; message carries file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Reference to an unknown entity, relation, item or user.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Path scoring failure (e.g. zero-norm embedding).
class ScoringError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcdir
