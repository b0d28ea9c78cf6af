#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tor {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or inconsistent configuration (unset credentials, bad flags, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Network or upstream-service failure. Retried by the gateway.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace tor
