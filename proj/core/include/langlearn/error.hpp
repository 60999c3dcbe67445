#pragma once

#include <stdexcept>
#include <string>

namespace langlearn {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed domain values (scene out of grid, bad label, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk input; message carries line/field diagnostics.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Pearson correlation requested on degenerate (zero-variance or too-short) input.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling could not reach the requested structure target.
class UnreachableTargetError : public Error {
 public:
  using Error::Error;
};

// Non-finite values encountered during training; message carries context.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace langlearn
