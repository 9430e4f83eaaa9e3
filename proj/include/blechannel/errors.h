#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blechannel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid settings, unknown preset names, inconsistent parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arguments outside a function's mathematical domain (e.g. distance <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Packets or restarts presented out of time order.
class TraceOrderError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NoDataError : public Error {
 public:
  using Error::Error;
};

// Trace/model file did not match its schema. line() is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A well-formed file that disagrees with the settings it is used with.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace blechannel
