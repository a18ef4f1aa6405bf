#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An oracle returned a non-finite value or was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadratic subproblem could not be solved (infeasible or out of iterations).
class QpFailure : public Error {
 public:
  using Error::Error;
};

/// Backtracking exceeded its budget; for valid oracles this cannot happen.
class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

/// Invalid solver or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdp
