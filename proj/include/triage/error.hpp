#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triage {

/// Base class of every error raised by the triage library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TRIAGE_DEFINE_ERROR(Name)       \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

TRIAGE_DEFINE_ERROR(InvalidImage);
TRIAGE_DEFINE_ERROR(DecodeError);
TRIAGE_DEFINE_ERROR(EmptySeries);
TRIAGE_DEFINE_ERROR(InvalidSeries);
TRIAGE_DEFINE_ERROR(NotComputed);
TRIAGE_DEFINE_ERROR(InvalidPolicy);
TRIAGE_DEFINE_ERROR(InvalidRotation);
TRIAGE_DEFINE_ERROR(NoReconstruction);
TRIAGE_DEFINE_ERROR(EmptyModel);
TRIAGE_DEFINE_ERROR(DegenerateEdge);
TRIAGE_DEFINE_ERROR(RangeError);
TRIAGE_DEFINE_ERROR(IoError);
TRIAGE_DEFINE_ERROR(ConfigError);

#undef TRIAGE_DEFINE_ERROR

/// Malformed keyframe listing. `line` is 1-based, 0 when not tied to a line.
class BadListing : public Error {
 public:
  BadListing(std::size_t line, const std::string& what)
      : Error("keyframe listing line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Syntactically invalid JSON. `offset` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed JSON that violates the expected document structure.
/// `path` is a slash-separated location such as "shots/img1.jpg/rotation/0".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace triage
