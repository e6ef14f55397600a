// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmqca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or configuration extents.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain argument (negative length, bad axis, dilation < 1, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// NaN or otherwise unusable floating-point input.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() on a non-scalar root.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or truncated checkpoint / dataset file.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint produced under a different model configuration or format version.
class FingerprintError : public Error {
 public:
  using Error::Error;
};

/// The phantom could not be placed inside the image.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace dmqca
