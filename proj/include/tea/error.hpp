#pragma once

#include <stdexcept>
#include <string>

namespace tea {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree in shape, or a map is too small for the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain (even kernel size, negative step, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Channel layout, bit depth or file format the code does not handle.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// Raised by a counted oracle on the call after the last one the budget allows.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// The remote oracle could not be reached or returned a non-2xx status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The remote oracle answered with something that is not the agreed wire format.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Source/target pair does not satisfy the attack preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tea
