#pragma once

#include <stdexcept>
#include <string>

namespace streetsafe {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite numbers, violated preconditions on argument values.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Mathematical domain violations (log of a nonpositive value, zero variance).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Design matrix without full column rank.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Input file does not match its expected schema. Carries file and field.
class SchemaError : public Error {
 public:
  SchemaError(std::string file, std::string field, const std::string& what)
      : Error(file + ": field '" + field + "': " + what),
        file_(std::move(file)),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::string field_;
};

/// Image too small for the requested crop bounds.
class ImageTooSmall : public Error {
 public:
  using Error::Error;
};

/// A scorer failed or violated the scorer/1 protocol. `index` identifies
/// the crop or occlusion trial that was being scored (-1 when not applicable).
class ScoringError : public Error {
 public:
  ScoringError(const std::string& what, long index = -1)
      : Error(index >= 0 ? what + " (index " + std::to_string(index) + ")" : what),
        index_(index) {}

  long index() const noexcept { return index_; }

 private:
  long index_;
};

}  // namespace streetsafe
