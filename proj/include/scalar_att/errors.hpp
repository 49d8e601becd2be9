#pragma once

#include <stdexcept>
#include <string>

namespace scalar_att {

/// Coarse failure category. The CLI maps these onto its exit codes.
enum class ErrorKind {
  InvalidArgument,  // caller violated a precondition or passed an unknown name
  Data,             // malformed or inconsistent input data, coverage violations
  Numerical,        // numerical breakdown (loss of definiteness, near-pi logarithm)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Throws the subclass matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::InvalidArgument: throw InvalidArgumentError(what);
    case ErrorKind::Data: throw DataError(what);
    case ErrorKind::Numerical: throw NumericalError(what);
  }
  throw Error(kind, what);
}

}  // namespace scalar_att
