#pragma once

#include <stdexcept>
#include <string>

namespace cqe {

/// Bad user input: malformed netlist, invalid option, inconsistent request.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Netlist syntax error with a 1-based source position.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line, int column)
      : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A numerical procedure failed (singular system, non-convergence, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cqe
