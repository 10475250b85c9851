#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gyrocomp {

/// Non-fatal validity notes collected by operations that accept a `Warnings*` sink.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value that breaks a type invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model evaluation that cannot proceed (division by a vanishing field, violated step bounds).
class ModelError : public Error {
 public:
  using Error::Error;
};

class SingularConfigurationError : public ModelError {
 public:
  using ModelError::ModelError;
};

class PreconditionError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Closed-loop simulation ran away.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time, double coil_field)
      : Error(what), time_(time), coil_field_(coil_field) {}

  double time() const { return time_; }
  double coil_field() const { return coil_field_; }

 private:
  double time_;
  double coil_field_;
};

}  // namespace gyrocomp
