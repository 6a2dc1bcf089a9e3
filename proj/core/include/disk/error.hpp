#pragma once

#include <stdexcept>
#include <string>

namespace disk {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A function argument outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by an operation or a diverged loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or unknown override key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing, truncated or inconsistent files on disk.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace disk
