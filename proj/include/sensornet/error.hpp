#pragma once

#include <stdexcept>
#include <string>

namespace sensornet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invariant-violating scenario / run configuration.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Arguments outside an operation's domain (coincident points, bad ranges, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerical engine failed to produce an answer (iteration caps, breakdown).
class SolverError : public Error {
 public:
  using Error::Error;
};

// Budgets admit no feasible selection.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace sensornet
