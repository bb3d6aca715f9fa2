#pragma once

#include <stdexcept>
#include <string>

namespace svtime {

// Bad input: malformed data, unknown model, out-of-support parameters.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite or exploding numerics during simulation or evaluation.
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace svtime
