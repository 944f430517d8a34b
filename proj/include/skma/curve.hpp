#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "skma/grid.hpp"
#include "skma/warp.hpp"

namespace skma {

// One functional datum: samples on a uniform grid, NaN outside the curve's
// own domain. Codomain may be multidimensional; every dimension shares the
// grid and the missing mask. Immutable after construction.
class SampledCurve {
 public:
  // `values` is one sample vector per codomain dimension, each of length
  // grid.count. Validates: >= 2 finite samples per dimension, identical
  // missing masks across dimensions, finite samples confined to `domain`.
  SampledCurve(std::string id, Interval domain, UniformGrid grid,
               std::vector<std::vector<double>> values);

  // Derives the domain from the finite sample extent of dimension 0.
  static SampledCurve from_values(std::string id, UniformGrid grid,
                                  std::vector<std::vector<double>> values);

  const std::string& id() const { return id_; }
  const Interval& domain() const { return domain_; }
  const UniformGrid& grid() const { return grid_; }
  std::size_t dims() const { return values_.size(); }
  const std::vector<double>& dim(std::size_t d) const { return values_[d]; }
  const std::vector<std::vector<double>>& values() const { return values_; }

  // Count of finite samples (dimension 0's mask, shared by all dimensions).
  std::size_t valid_count() const { return valid_count_; }

 private:
  std::string id_;
  Interval domain_;
  UniformGrid grid_;
  std::vector<std::vector<double>> values_;
  std::size_t valid_count_ = 0;
};

// x -> f(h(x)) sampled on `target` by linear interpolation of f's samples;
// points mapping outside f's domain are missing, no extrapolation. Throws
// DegenerateWarpError when fewer than 2 valid samples remain.
SampledCurve curve_warp(const SampledCurve& f, const AffineWarp& h,
                        const UniformGrid& target);

// True when every curve carries the same missing mask on a shared grid.
bool equal_masks(const std::vector<SampledCurve>& curves);

// Uniform grid with `resolution` points spanning the union of the curve
// domains. Throws on an empty curve set.
UniformGrid common_grid(const std::vector<SampledCurve>& curves,
                        std::size_t resolution);

}  // namespace skma
