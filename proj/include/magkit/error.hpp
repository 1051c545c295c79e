// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace magkit {

/// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind { usage, data, numerical };

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
      return 1;
    case ErrorKind::data:
      return 2;
    case ErrorKind::numerical:
      return 3;
  }
  return 2;
}

inline const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
      return "usage";
    case ErrorKind::data:
      return "data";
    case ErrorKind::numerical:
      return "numerical";
  }
  return "data";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::usage, what) {}
};

/// Malformed or out-of-domain input: non-finite values, bad shapes, empty sets.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InsufficientDataError : public InputError {
 public:
  using InputError::InputError;
};

class DuplicatePointError : public InputError {
 public:
  DuplicatePointError(const std::string& what, std::vector<std::size_t> indices)
      : InputError(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

class DisconnectedGraphError : public InputError {
 public:
  DisconnectedGraphError(const std::string& what,
                         std::vector<std::vector<std::size_t>> components)
      : InputError(what), components_(std::move(components)) {}
  const std::vector<std::vector<std::size_t>>& components() const noexcept {
    return components_;
  }

 private:
  std::vector<std::vector<std::size_t>> components_;
};

/// A factorization or solve could not be completed.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double smallest_pivot)
      : NumericalError(what), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const noexcept { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

/// Coincident points made a similarity matrix singular.
class CoincidentPointsError : public SingularMatrixError {
 public:
  CoincidentPointsError(const std::string& what, std::vector<std::size_t> indices)
      : SingularMatrixError(what, 0.0), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// The Schur scalar of a single-point augmentation vanished: the new point
/// coincides with a cached point.
class DegenerateAugmentationError : public NumericalError {
 public:
  DegenerateAugmentationError(const std::string& what, double schur_scalar)
      : NumericalError(what), schur_scalar_(schur_scalar) {}
  double schur_scalar() const noexcept { return schur_scalar_; }

 private:
  double schur_scalar_;
};

}  // namespace magkit
