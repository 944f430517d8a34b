#include "skma/curve.hpp"

#include <cmath>
#include <utility>

#include "skma/kernels.hpp"

namespace skma {

namespace {

// First and last finite index of v; {npos, npos} when all missing.
std::pair<std::size_t, std::size_t> finite_extent(const std::vector<double>& v) {
  const std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t first = npos, last = npos;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (is_missing(v[j])) continue;
    if (first == npos) first = j;
    last = j;
  }
  return {first, last};
}

}  // namespace

SampledCurve::SampledCurve(std::string id, Interval domain, UniformGrid grid,
                           std::vector<std::vector<double>> values)
    : id_(std::move(id)), domain_(domain), grid_(grid), values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("SampledCurve: no dimensions");
  for (const auto& v : values_)
    if (v.size() != grid_.count)
      throw InvalidArgument("SampledCurve: dimension length != grid count");

  const std::vector<double>& ref = values_[0];
  for (std::size_t j = 0; j < grid_.count; ++j) {
    const bool miss = is_missing(ref[j]);
    for (std::size_t d = 1; d < values_.size(); ++d)
      if (is_missing(values_[d][j]) != miss)
        throw InvalidArgument("SampledCurve: dimensions disagree on missing mask");
    if (!miss) {
      ++valid_count_;
      const double x = grid_.x(j);
      // half-step slack: domain endpoints need not be grid nodes
      if (x < domain_.lo - 0.5 * grid_.step || x > domain_.hi + 0.5 * grid_.step)
        throw InvalidArgument("SampledCurve: finite sample outside domain");
    }
  }
  if (valid_count_ < 2)
    throw InvalidArgument("SampledCurve: fewer than 2 finite samples");
}

SampledCurve SampledCurve::from_values(std::string id, UniformGrid grid,
                                       std::vector<std::vector<double>> values) {
  if (values.empty()) throw InvalidArgument("SampledCurve: no dimensions");
  const auto [first, last] = finite_extent(values[0]);
  if (first == static_cast<std::size_t>(-1) || first == last)
    throw InvalidArgument("SampledCurve: fewer than 2 finite samples");
  Interval domain(grid.x(first), grid.x(last));
  return SampledCurve(std::move(id), domain, grid, std::move(values));
}

SampledCurve curve_warp(const SampledCurve& f, const AffineWarp& h,
                        const UniformGrid& target) {
  const UniformGrid& src = f.grid();
  // Source position of target node j: ((a*x_j + b) - start) / step, affine
  // in j, so the kernel takes just (p0, dp).
  const double p0 = (h.a * target.start + h.b - src.start) / src.step;
  const double dp = h.a * target.step / src.step;

  std::vector<std::vector<double>> out(f.dims());
  for (std::size_t d = 0; d < f.dims(); ++d) {
    out[d].resize(target.count);
    kernels::warp_lerp(out[d].data(), target.count, f.dim(d).data(), src.count, p0,
                       dp);
  }

  if (kernels::sum_finite(out[0].data(), out[0].size()).count < 2)
    throw DegenerateWarpError("curve_warp: fewer than 2 valid samples for curve " +
                              f.id());

  return SampledCurve::from_values(f.id(), target, std::move(out));
}

bool equal_masks(const std::vector<SampledCurve>& curves) {
  if (curves.size() < 2) return true;
  const SampledCurve& ref = curves.front();
  for (const SampledCurve& c : curves) {
    if (!(c.grid() == ref.grid())) return false;
    for (std::size_t j = 0; j < ref.grid().count; ++j)
      if (is_missing(c.dim(0)[j]) != is_missing(ref.dim(0)[j])) return false;
  }
  return true;
}

UniformGrid common_grid(const std::vector<SampledCurve>& curves,
                        std::size_t resolution) {
  if (curves.empty()) throw InvalidArgument("common_grid: empty curve set");
  std::vector<Interval> domains;
  domains.reserve(curves.size());
  for (const SampledCurve& c : curves) domains.push_back(c.domain());
  return span_grid(domains, resolution);
}

}  // namespace skma
