#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relpose {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied input: unreadable files, malformed records, mismatched
// identifiers. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class FileError : public InputError {
 public:
  explicit FileError(const std::string& path, const std::string& what)
      : InputError(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NonFiniteValue : public ParseError {
 public:
  using ParseError::ParseError;
};

#define RELPOSE_DEFINE_ERROR(Name, Base) \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  };

RELPOSE_DEFINE_ERROR(DuplicateImageId, InputError)
RELPOSE_DEFINE_ERROR(IdMismatch, InputError)
RELPOSE_DEFINE_ERROR(MissingKeypoints, InputError)
RELPOSE_DEFINE_ERROR(DimensionMismatch, InputError)
RELPOSE_DEFINE_ERROR(InvalidFov, InputError)

RELPOSE_DEFINE_ERROR(InvariantViolation, Error)
RELPOSE_DEFINE_ERROR(DegenerateQuaternion, Error)
RELPOSE_DEFINE_ERROR(NotARotation, Error)
RELPOSE_DEFINE_ERROR(DegenerateTranslation, Error)
RELPOSE_DEFINE_ERROR(DegenerateLine, Error)
RELPOSE_DEFINE_ERROR(EmptySequence, Error)
RELPOSE_DEFINE_ERROR(SingleFrame, Error)
RELPOSE_DEFINE_ERROR(EmptyBatch, Error)
RELPOSE_DEFINE_ERROR(EmptyInput, Error)
RELPOSE_DEFINE_ERROR(ZeroBaseline, Error)

#undef RELPOSE_DEFINE_ERROR

}  // namespace relpose
