#pragma once

#include <stdexcept>
#include <string>

namespace linext {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied values that violate a precondition (shapes, counts, config).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// The operating system refused a read or write.
class IoError : public Error {
public:
  using Error::Error;
};

/// A file was readable but its contents do not follow the expected layout.
class FormatError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class BadMagicError : public FormatError {
public:
  using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
public:
  using FormatError::FormatError;
};

}  // namespace linext
