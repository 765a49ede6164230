#pragma once

#include <stdexcept>
#include <string>

namespace firefront {

/// Bad configuration or arguments: maps to process exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (scenario/config/CSV): also exit code 1.
class ParseError : public ValidationError {
public:
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

/// Numerical blow-up (non-finite loss or field): exit code 2.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, long long iteration)
      : std::runtime_error(what), iteration(iteration) {}
  long long iteration;
};

/// Filesystem failure: exit code 3.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace firefront
