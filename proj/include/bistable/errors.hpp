#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bistable {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (invalid parameters,
/// negative radii, non-finite states, wrong regime).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The integrated state left the ball of radius 1e6.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// A theorem's hypothesis is not met, so no verdict can be given.
class PreconditionError : public Error {
 public:
  enum class Kind { InitialStateOutside, InputTooLarge, ParamsMismatch };

  PreconditionError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Malformed input file. `row` is 1-based and counts the header line.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Invalid experiment configuration. `key` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Linear algebra failed or a numerical cross-check disagreed.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bistable
