#pragma once

#include <stdexcept>
#include <string>

namespace pressure_id {

/// Argument or state violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// File is not in a recognised format (bad magic or unsupported version).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// File is recognised but its payload is truncated or inconsistent.
class CorruptionError : public std::runtime_error {
 public:
  explicit CorruptionError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss. The message carries epoch, step and term values.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// Throws ValidationError(message) when `condition` is false.
void require(bool condition, const std::string& message);

}  // namespace pressure_id
