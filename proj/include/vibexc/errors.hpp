#pragma once

#include <stdexcept>
#include <string>

namespace vibexc {

// Bad inputs: dimension mismatches, non-unitary matrices, out-of-range
// indices, malformed files. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical breakdown on inputs that passed validation: non-positive-definite
// Q, complex residue on a probability, vanishing conditional mass. CLI maps
// this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vibexc
