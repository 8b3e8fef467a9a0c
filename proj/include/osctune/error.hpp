#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osctune {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (expressions, model files, LHA documents, configs).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A structurally well-formed document that violates a semantic invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Runtime failure while evaluating an expression (division by zero, NaN).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the stochastic simulator or the synchronizer.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace osctune
