#pragma once

#include <stdexcept>
#include <string>

namespace pinchlab {

// Argument outside the admissible range of a closed-form formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input that falls outside the rotationally invariant model (e.g. h_sθ != 0).
class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent combinatorial data (dangling collar ends, duplicated ends...).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A lemma hypothesis is violated, e.g. (2 K0 L(t0))^2 > delta.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON or inline spec; carries a 1-based line/column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace pinchlab
