#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incalib {

// Raster/field shape violations (too small, mismatched dimensions, ...).
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A ray that cannot be brought into the requested normalization state.
struct DegenerateRayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A resampling transform whose preimage leaves the source raster.
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal-sample solver fed a sample it cannot invert.
struct SolverDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear system singular or near-singular beyond the documented bound.
struct DegenerateConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// RANSAC produced no valid candidate on at least one axis.
struct CalibrationFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cheirality vote failed to produce a dominant pose candidate.
struct AmbiguousPoseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed raster file; carries the byte offset where parsing failed.
struct FormatError : std::runtime_error {
  std::size_t byte_offset;
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

}  // namespace incalib
