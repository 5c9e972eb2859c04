#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cxrseg {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed image container. offset() is the byte position where parsing failed.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Well-formed container using a layout the decoder does not handle.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

// Malformed tabular input (manifest, curated CSV).
class FormatError : public Error {
 public:
  using Error::Error;
};

class CurationError : public Error {
 public:
  using Error::Error;
};

// External artifacts (masks, score files) that do not match what the pipeline expects.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// A metric whose definition breaks down on the given data, e.g. AUROC with one class.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace cxrseg
