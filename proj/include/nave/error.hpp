#pragma once

#include <stdexcept>
#include <string>

namespace nave {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (tensor header, model container, PNG).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Document parsed but violates a schema or cross-entry invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments that break an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message always carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nave
