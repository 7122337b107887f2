#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psamp {

/// Precondition violation on a public entry point.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shapes of two operands (matrix vs grid, seed vs modes) disagree.
class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A dense factorization did not converge or produced non-finite output.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Curve never drops below half maximum inside the sampled range.
class NoCrossing : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for everything the configuration layer rejects.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public ConfigError {
 public:
  ValidationError(std::string key, const std::string& what)
      : ConfigError("invalid value for '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class UnknownKeyError : public ConfigError {
 public:
  explicit UnknownKeyError(std::string key)
      : ConfigError("unknown key '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace psamp
