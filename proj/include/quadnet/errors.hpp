#pragma once

#include <stdexcept>
#include <string>

namespace quadnet {

/// Bad input: shapes, ranges, malformed files or configs.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: non-finite values, violated error/parameter bounds.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quadnet
