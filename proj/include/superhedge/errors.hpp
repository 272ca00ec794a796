#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace superhedge {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or broken invariants on values handed to the library.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input data (CSV, JSON) that cannot be parsed or is inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The no-immediate-profit condition fails; `step` is the 0-based model step
/// (the trading date t-1 of the offending period t-1 -> t).
class AipViolation : public Error {
 public:
  AipViolation(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A numerical procedure could not deliver a result within its limits.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace superhedge
