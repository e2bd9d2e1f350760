#pragma once

#include <stdexcept>
#include <string>

namespace sptree {

// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation that needs at least one point was handed an empty cell.
struct EmptyCell : Error {
  EmptyCell() : Error("empty cell") {}
  explicit EmptyCell(const std::string& what) : Error(what) {}
};

// Matrix input violates a structural requirement (not square, not symmetric).
struct InvalidMatrix : Error {
  using Error::Error;
};

// A cell whose covariance carries no signal (zero trace, all points equal).
struct DegenerateCell : Error {
  using Error::Error;
};

// Cells handed in do not form a partition (weights off, overlap, gaps).
struct InvalidPartition : Error {
  using Error::Error;
};

// A scalar argument outside its documented range.
struct InvalidParam : Error {
  using Error::Error;
};

// Dataset unusable for the requested computation (e.g. all points identical).
struct DegenerateData : Error {
  using Error::Error;
};

// Run-configuration problem; carries the field path for diagnostics.
struct ConfigError : Error {
  ConfigError(const std::string& field_path, const std::string& message)
      : Error(field_path + ": " + message), field(field_path) {}
  std::string field;
};

// Filesystem / parsing failure on an external file.
struct IoError : Error {
  using Error::Error;
};

}  // namespace sptree
