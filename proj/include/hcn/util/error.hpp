#pragma once

#include <stdexcept>
#include <string>

namespace hcn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or vector shapes that do not agree with a model's dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, labels, masks).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Training could not reach its stated goal (e.g. consistency restoration cap).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace hcn
