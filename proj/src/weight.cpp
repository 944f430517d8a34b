#include "skma/weight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skma/criterion.hpp"

namespace skma {

WeightFunction WeightFunction::uniform(const UniformGrid& g) {
  const double mu = static_cast<double>(g.count) * g.step;
  return WeightFunction(g, std::vector<double>(g.count, 1.0 / std::sqrt(mu)), 0.0);
}

double WeightFunction::l2_norm() const {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::sqrt(sq * grid.step);
}

double WeightFunction::zero_measure() const {
  std::size_t zeros = 0;
  for (double v : values)
    if (v == 0.0) ++zeros;
  return static_cast<double>(zeros) * grid.step;
}

double WeightFunction::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

WeightFunction solve_weight(const CriterionProfile& g, SparsityParam m) {
  const std::size_t count = g.grid.count;
  if (g.values.size() != count)
    throw InvalidArgument("solve_weight: profile length != grid count");
  for (double v : g.values)
    if (!std::isfinite(v))
      throw InvalidArgument("solve_weight: criterion profile must be finite");

  std::vector<double> gplus(count);
  for (std::size_t j = 0; j < count; ++j) gplus[j] = std::max(g.values[j], 0.0);

  // Zero-set size in points; measure constraints are exact point counts
  // under the rectangle rule.
  const std::size_t z_req = static_cast<std::size_t>(
      std::ceil(m.m_fraction * static_cast<double>(count) - 1e-12));
  if (z_req >= count)
    throw DegenerateCriterionError(
        "solve_weight: sparsity level leaves an empty support");

  // Ascending by g+, ties toward low grid indices.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gplus[a] < gplus[b];
  });

  std::vector<double> w = gplus;
  for (std::size_t r = 0; r < z_req; ++r) w[order[r]] = 0.0;

  double sq = 0.0;
  for (double v : w) sq += v * v;
  const double norm = std::sqrt(sq * g.grid.step);
  if (!(norm > 0.0))
    throw DegenerateCriterionError(
        "solve_weight: criterion is non-positive on the whole kept set");
  const double inv = 1.0 / norm;
  for (double& v : w) v *= inv;

  return WeightFunction(g.grid, std::move(w), m.m_fraction);
}

WeightReport verify_weight(const WeightFunction& w) {
  WeightReport r;
  r.norm = w.l2_norm();
  r.min_value = w.min_value();
  r.zero_measure = w.zero_measure();
  r.required_zero_measure =
      w.m_fraction * static_cast<double>(w.grid.count) * w.grid.step;
  r.norm_ok = r.norm <= 1.0 + 1e-9;
  r.nonneg_ok = r.min_value >= 0.0;
  r.sparsity_ok =
      r.zero_measure >= r.required_zero_measure - w.grid.step - 1e-12;
  return r;
}

}  // namespace skma
