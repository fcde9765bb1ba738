#pragma once

#include <stdexcept>
#include <string>

namespace gtap {

// Base of every error the library throws. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file or byte stream does not match its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The file is well-formed but written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace gtap
