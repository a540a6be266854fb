#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace slabflow {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver failed to converge or hit a singular pivot.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; `key` names the offending parameter.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace slabflow
