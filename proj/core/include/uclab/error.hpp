#pragma once

#include <stdexcept>
#include <string>

namespace uclab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: wrong dimension, out-of-range parameter, malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A query touches a point where the function is not harmonic (a charge).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A refinement loop exhausted its budget before meeting the tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A norm used as a denominator (inner sup, sphere norm) is indistinguishable from zero.
class VanishingGradient : public Error {
 public:
  using Error::Error;
};

/// An experiment's precondition fails for this input; nothing is wrong with the code.
class Inapplicable : public Error {
 public:
  using Error::Error;
};

/// Input could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace uclab
