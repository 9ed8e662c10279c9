#pragma once

#include <stdexcept>
#include <string>

namespace combkit {

/// Base of every exception thrown by combkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: unknown or duplicate labels, shape mismatches, bad
/// parameters, unparseable files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input outside the mathematical domain of an operation:
/// non-Hermitian or non-positive operators, support violations, infeasible
/// programs.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The SDP solver stopped without reaching its tolerances.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace combkit
