#pragma once

#include <stdexcept>
#include <string>

namespace voxmc {

/// Invalid user-supplied value (bad config field, violated invariant).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON syntax, missing/ill-typed field).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VoxelOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AlreadyNormalized : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SourceOutsideDomain : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Pilot timings gave a non-increasing runtime; timing noise dominates.
class NonPositiveSlope : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonPositiveRadius : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace voxmc
