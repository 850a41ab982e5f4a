#pragma once

#include <stdexcept>
#include <string>

namespace usc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (e.g. dimension mismatch).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Metric matrix handed to a generalized projection is not SPD.
class InvalidMetric : public Error {
 public:
  using Error::Error;
};

// Class parameter (lambda, alpha) outside the supported range.
class ParameterRangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced by an oracle or an update.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long round = -1)
      : Error(round >= 0 ? what + " (round " + std::to_string(round) + ")" : what), round_(round) {}

  long round() const { return round_; }

 private:
  long round_;
};

// A modelling assumption (gradient bound G, diameter D) does not hold for the data.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class InvariantFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace usc
