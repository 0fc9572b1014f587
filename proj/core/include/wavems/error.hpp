#pragma once

#include <stdexcept>
#include <string>

namespace wavems {

// Base of every error raised by the library. Callers that only need a message
// catch this; the CLI maps the concrete subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents incompatible with an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument outside its documented domain (stride <= 0, label out of range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong state (missing gradient, freed graph).
class StateError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

// A requested cross-validation fold does not exist in the manifest.
class FoldError : public ManifestError {
 public:
  using ManifestError::ManifestError;
};

// Invalid model/train configuration or run-config document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavems
