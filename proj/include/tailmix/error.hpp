#pragma once

#include <stdexcept>
#include <string>

namespace tailmix {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (alpha <= 1, lambda <= 0, x < x_min).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or insufficient input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent arguments: mismatched vector lengths, fits from different series.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given model or mode.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailmix
