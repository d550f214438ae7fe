#pragma once

#include <stdexcept>
#include <string>

namespace wiener {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel could not produce a trustworthy result
/// (rank deficiency, non-finite cost, total quadrature underflow).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wiener
