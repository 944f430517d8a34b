#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "skma/error.hpp"

namespace skma {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Compact abscissa interval [lo, hi], lo < hi, both finite.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
      throw InvalidArgument("Interval requires finite lo < hi");
  }

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Uniform abscissa grid: x(j) = start + j*step, j in [0, count).
// The measure of a point set is (#points) * step throughout the library,
// so set measures are exactly proportional to point counts.
struct UniformGrid {
  double start;
  double step;
  std::size_t count;

  UniformGrid(double start_, double step_, std::size_t count_)
      : start(start_), step(step_), count(count_) {
    if (!(std::isfinite(start) && std::isfinite(step)) || !(step > 0.0) || count < 2)
      throw InvalidArgument("UniformGrid requires finite start, step > 0, count >= 2");
  }

  double x(std::size_t j) const { return start + static_cast<double>(j) * step; }
  double back() const { return x(count - 1); }
  Interval covered() const { return Interval(start, back()); }

  // Fractional index of abscissa value y; not clamped.
  double position(double y) const { return (y - start) / step; }

  bool operator==(const UniformGrid& o) const {
    return start == o.start && step == o.step && count == o.count;
  }
};

// Rectangle rule over non-missing points: sum v(x_j) * step.
double integrate(std::span<const double> values, const UniformGrid& grid);

// Uniform grid with `resolution` points spanning the union of the given
// intervals. Throws on an empty interval set.
UniformGrid span_grid(const std::vector<Interval>& domains, std::size_t resolution);

}  // namespace skma
