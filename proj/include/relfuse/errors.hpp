#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relfuse {

/// Input violates a documented precondition (bad grid, negative precision, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Query at a time the posterior cannot inform (no prior mass and nobody at risk).
class NotEstimable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Moments that do not describe a proper beta (zero or excessive variance).
class DegenerateMoments : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parse failure carrying a 1-based source position. Row-oriented inputs use
/// line only and report column 0.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace relfuse
