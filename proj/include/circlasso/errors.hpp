// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace circlasso {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A configuration value is outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A spectral denominator fell below the invertibility floor.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// A quantity that must stay finite (measurements, solver iterate) became
// non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A request would materialize a dense object above the configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A file does not match the expected on-disk format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An inverse transform of a mathematically real quantity carried an
// imaginary residue above tolerance; indicates an internal defect.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// A kernel work item failed; carries the lowest offending global id.
class PhaseError : public Error {
 public:
  PhaseError(const std::string& what, std::int64_t global_id)
      : Error(what), global_id_(global_id) {}

  std::int64_t global_id() const { return global_id_; }

 private:
  std::int64_t global_id_;
};

}  // namespace circlasso
