#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace porelec {

/// Invalid physical, geometric or solver parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operator assembly failed (bad conductivity, incomplete boundary data, ...).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written, or its content is malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration entry. Carries the offending key and the
/// config line (0 when it came from an override).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : std::invalid_argument(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// An iterative procedure did not converge. Carries the iteration history so
/// callers can report what happened.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace porelec
