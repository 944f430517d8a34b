#pragma once

#include <vector>

#include "skma/grid.hpp"

namespace skma {

struct CriterionProfile;

// Sparsity level: w must vanish on a set of measure >= m_fraction * mu(D).
struct SparsityParam {
  double m_fraction = 0.0;

  SparsityParam() = default;
  explicit SparsityParam(double m) : m_fraction(m) {
    if (!(m >= 0.0 && m < 1.0))
      throw InvalidArgument("SparsityParam requires 0 <= m < 1");
  }
};

// Discretized weighting function on the common grid. Invariants (checked by
// verify_weight, maintained by solve_weight): ||w||_L2 <= 1 under rectangle
// quadrature, w >= 0, zero-set measure >= m_fraction * mu(D) - step.
struct WeightFunction {
  UniformGrid grid;
  std::vector<double> values;
  double m_fraction = 0.0;

  WeightFunction(UniformGrid g, std::vector<double> v, double m)
      : grid(g), values(std::move(v)), m_fraction(m) {
    if (values.size() != grid.count)
      throw InvalidArgument("WeightFunction: length != grid count");
  }

  // w == 1/sqrt(mu(D)) everywhere: unit norm, no zero set.
  static WeightFunction uniform(const UniformGrid& g);

  double l2_norm() const;
  double zero_measure() const;
  double min_value() const;
};

struct WeightReport {
  double norm = 0.0;          // ||w||_L2
  double min_value = 0.0;     // min_j w_j
  double zero_measure = 0.0;  // (#exact zeros) * step
  double required_zero_measure = 0.0;
  bool norm_ok = false;
  bool nonneg_ok = false;
  bool sparsity_ok = false;

  bool all_ok() const { return norm_ok && nonneg_ok && sparsity_ok; }
};

// Optimal weight for a fixed criterion profile: clip g at zero, zero out the
// smallest-g mass until the zero set reaches measure m (ties broken toward
// low grid indices), then scale the kept profile to unit L2 norm. Throws
// DegenerateCriterionError when g <= 0 everywhere or the support would be
// empty.
WeightFunction solve_weight(const CriterionProfile& g, SparsityParam m);

// Constraint residuals of an arbitrary w; report-only, never throws.
WeightReport verify_weight(const WeightFunction& w);

}  // namespace skma
