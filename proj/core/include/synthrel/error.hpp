#pragma once

#include <stdexcept>
#include <string>

namespace synthrel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed metadata, missing files or uncoercible schema declarations.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// A precondition on arguments (table names, fold counts, sizes) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace synthrel
