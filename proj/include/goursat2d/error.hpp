#pragma once

#include <stdexcept>
#include <string>

namespace goursat2d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a scalar argument (resolution, weight, sample count...) failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Fields on different grids or with different state dimensions were combined.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Problem document does not follow the schema. `path` names the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)), message_(what) {}
  const std::string& path() const noexcept { return path_; }
  /// The message without the path prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string path_;
  std::string message_;
};

/// m violates a threshold required by an estimate (m > 8B, m > 0, ...).
class ThresholdError : public Error {
 public:
  using Error::Error;
};

}  // namespace goursat2d
