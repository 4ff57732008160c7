#pragma once

#include <stdexcept>
#include <string>

namespace backforth {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed interchange document. The message carries the location.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A search exceeded its node budget. Never a wrong answer.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace backforth
