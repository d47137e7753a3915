#pragma once

#include <stdexcept>
#include <string>

namespace phc {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numeric or structural parameter is outside its admissible range.
class parameter_error : public error {
public:
  using error::error;
};

/// The requested computation would exceed a configured size budget.
class resource_error : public error {
public:
  using error::error;
};

/// An input violated a documented precondition (e.g. a non-monotone complex).
class contract_error : public error {
public:
  using error::error;
};

/// Malformed text input. Carries the 1-based line number when known.
class parse_error : public error {
public:
  parse_error(const std::string& what, std::size_t line = 0)
      : error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Experiment configuration is incomplete or inconsistent.
class config_error : public error {
public:
  using error::error;
};

}  // namespace phc
