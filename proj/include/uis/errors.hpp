#pragma once

#include <stdexcept>
#include <string>

namespace uis {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument: bad dimension, out-of-range parameter, empty input.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A collaborator (usually a denoiser) broke its contract, e.g. returned a
// signal of the wrong shape.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Constraint W^T x = x_w has no solution (rank-deficient W, inconsistent x_w).
class InfeasibleConstraint : public Error {
 public:
  using Error::Error;
};

// Malformed frame received over the denoiser wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The external denoiser did not answer within the configured timeout.
class BridgeTimeout : public Error {
 public:
  using Error::Error;
};

// The external denoiser process could not be (re)started or kept dying.
class BridgeProcessError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration (CLI / JSON config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace uis
