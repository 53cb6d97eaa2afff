#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace moa_lab {

// Argument outside the documented input domain (operand range, shape, lengths).
class InputDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request would exceed a fixed work cap (e.g. exhaustive enumeration size).
class ResourceGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// State machine driven out of order.
class SequencingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Arithmetic result does not fit the target type.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace moa_lab
