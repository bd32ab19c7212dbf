#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor, layer, or parameter shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity produced inside a model or supplied as a gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (IDX files, shards, class counts).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `key()` names the offending entry when known and
/// `line()` is the 1-based line in the source text (0 when not applicable).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string key = {}, int line = 0)
      : Error(message), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// A client failed during local training; aborts the experiment.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& message, int round, int client)
      : Error(message), round_(round), client_(client) {}

  int round() const noexcept { return round_; }
  int client() const noexcept { return client_; }

 private:
  int round_;
  int client_;
};

}  // namespace fedsim
