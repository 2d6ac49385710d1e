#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfgan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not compose (wrong input length, layer mismatch, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Jet propagation was requested through an activation that is not C^3.
class UnsupportedActivation : public Error {
 public:
  using Error::Error;
};

/// A differentiated expression hit a point where it has no derivative.
class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or a domain violation (log of zero, non-positive density, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-facing configuration; `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Malformed or truncated file. `offset()` is the byte position where
/// parsing stopped and `section()` the header section being read.
class ParseError : public Error {
 public:
  ParseError(std::string section, std::size_t offset, const std::string& what);
  const std::string& section() const { return section_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string section_;
  std::size_t offset_;
};

}  // namespace mfgan
