#pragma once

#include <stdexcept>
#include <string>

namespace rope {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite or dimensionally inconsistent inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

// Warm start / initial information matrix could not be formed.
class InitializationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public InitializationError {
 public:
  using InitializationError::InitializationError;
};

// Environment construction failures (rank deficiency, unusable policy, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Numerical failures: non-convergence, singular oracle systems.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed external input files; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rope
