#pragma once

#include <stdexcept>
#include <string>

namespace nesgd {

// Operands of incompatible shape (vector vs matrix, or mismatched dimensions).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition on a value was violated (non-positive stepsize, point outside
// the constraint ball, singular payload where an inverse is required, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file or document could not be parsed or does not follow its schema.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nesgd
