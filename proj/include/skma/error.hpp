#pragma once

#include <stdexcept>
#include <string>

namespace skma {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid construction arguments (bad interval, grid, warp, config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two curves share no grid point, or fewer than 2; distances are undefined.
class EmptyOverlapError : public Error {
 public:
  using Error::Error;
};

// A candidate warp left fewer than 2 valid samples on the target grid.
class DegenerateWarpError : public Error {
 public:
  using Error::Error;
};

// Criterion profile is non-positive everywhere, or the sparsity level
// would empty the weight support.
class DegenerateCriterionError : public Error {
 public:
  using Error::Error;
};

// A curve with zero H1 semi-norm (constant) cannot enter a similarity.
class DegenerateSimilarityError : public Error {
 public:
  using Error::Error;
};

// Malformed input files.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace skma
