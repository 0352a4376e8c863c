#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cosyn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. `position()` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Invalid user-supplied configuration or precondition violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Overflow, non-finite values, or a guard on problem size.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Density estimation could not be performed for the requested query.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// The requested operation needs model structure this model does not have.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace cosyn
