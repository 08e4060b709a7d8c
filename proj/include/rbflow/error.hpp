#pragma once

#include <stdexcept>
#include <string>

namespace rbflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid family/flow/run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a closed-form expression (e.g. t >= T').
class DomainError : public Error {
 public:
  using Error::Error;
};

// Eigensolver non-convergence, non-finite state, and similar.
class NumericError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace rbflow
