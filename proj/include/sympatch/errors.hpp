#pragma once

#include <stdexcept>
#include <string>

namespace sympatch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateElementError : public Error {
 public:
  DegenerateElementError(int element, const std::string& what)
      : Error("element " + std::to_string(element) + ": " + what), element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class ConstraintConflictError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sympatch
