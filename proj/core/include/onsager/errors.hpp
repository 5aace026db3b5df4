#pragma once

#include <stdexcept>
#include <string>

namespace onsager {

// Caller supplied something that violates a documented precondition or
// invariant (bad shape, negative density, b out of range, malformed file).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not be carried out in floating point: exponent
// overflow guard, step-size underflow, detected instability.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace onsager
