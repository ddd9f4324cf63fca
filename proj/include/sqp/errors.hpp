// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sqp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by the numerics (caustics, collisions, blow-up). The CLI
/// maps all of these to one exit code.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class InterpolationOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonpositiveEpsilon : public Error {
 public:
  using Error::Error;
};

class InsufficientOscillations : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class CollisionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CausticSingular : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureNotConverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BoundaryLeak : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sqp
