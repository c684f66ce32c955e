// Copyright (C) 2026 mvpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mvpose {

/// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad value, shape mismatch).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// An extrinsics block failed the SO(3) orthogonality test.
class InvalidExtrinsicsError : public Error {
 public:
  using Error::Error;
};

/// Input file or in-memory document violates a format invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Geometry too poor to solve: collinear points, empty correspondence sets.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared mid-optimization.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvpose
