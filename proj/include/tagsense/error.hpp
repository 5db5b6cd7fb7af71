#pragma once

#include <stdexcept>
#include <string>

namespace tagsense {

// Base of every error the library raises. The CLI maps the subclasses onto
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file or text structure (headers, column groups, model text).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite, missing or out-of-range numeric value.
class ValueError : public Error {
 public:
  using Error::Error;
};

// Unknown or mismatched behaviour label.
class LabelError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A burst or feature array of the wrong length.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Empty or degenerate training/evaluation data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tagsense
