#include "skma/grid.hpp"

#include "skma/kernels.hpp"

namespace skma {

double integrate(std::span<const double> values, const UniformGrid& grid) {
  if (values.size() != grid.count)
    throw InvalidArgument("integrate: values length must equal grid count");
  return kernels::sum_finite(values.data(), values.size()).sum * grid.step;
}

UniformGrid span_grid(const std::vector<Interval>& domains, std::size_t resolution) {
  if (domains.empty()) throw InvalidArgument("span_grid: empty domain set");
  if (resolution < 2) throw InvalidArgument("span_grid: resolution must be >= 2");
  double lo = domains.front().lo;
  double hi = domains.front().hi;
  for (const Interval& d : domains) {
    if (d.lo < lo) lo = d.lo;
    if (d.hi > hi) hi = d.hi;
  }
  const double step = (hi - lo) / static_cast<double>(resolution - 1);
  return UniformGrid(lo, step, resolution);
}

}  // namespace skma
