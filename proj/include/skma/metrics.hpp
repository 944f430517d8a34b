#pragma once

#include <span>

#include "skma/curve.hpp"
#include "skma/weight.hpp"

namespace skma {

// Functional measure driving clustering and alignment: normalized L2
// distance (minimized) or H1 semi-norm similarity (maximized).
enum class MetricKind { l2_distance, h1_similarity };

// f' estimates on the same grid as f; missing where f is missing.
struct DerivativeCurve {
  SampledCurve curve;
};

// Central differences at interior points, one-sided at the endpoints of
// each valid run. Requires >= 3 finite samples per dimension.
DerivativeCurve estimate_derivative(const SampledCurve& f);

// (1 / sqrt(mu(D1 ^ D2))) * sqrt( integral over D1 ^ D2 of sum_d (f1-f2)^2 ).
// The intersection is the point-wise non-missing overlap; multidimensional
// codomains aggregate under a single square root (Euclidean norm in R^p).
// Throws EmptyOverlapError when the overlap has fewer than 2 points.
double dist_l2(const SampledCurve& f1, const SampledCurve& f2);

// Weighted variant: integrand gains the factor w(x); the normalizing
// measure stays unweighted.
double dist_l2_weighted(const SampledCurve& f1, const SampledCurve& f2,
                        std::span<const double> w);

inline double dist_l2_weighted(const SampledCurve& f1, const SampledCurve& f2,
                               const WeightFunction& w) {
  return dist_l2_weighted(f1, f2, std::span<const double>(w.values));
}

// <f1', f2'> / (|f1| |f2|), all three integrals over the overlap; for p > 1
// dimensions, the average of the per-dimension index. Throws
// DegenerateSimilarityError on a zero semi-norm.
double similarity_h1(const SampledCurve& f1, const SampledCurve& f2);

// Per-dimension H1 semi-norms sqrt(integral of f'^2) over f's own domain.
std::vector<double> h1_seminorms(const SampledCurve& f);

// u = f' / |f|_H1 per dimension, with the semi-norm taken over f's own
// domain. This is the profile entering the within-cluster similarity
// criterion and the H1 template matching.
SampledCurve normalized_derivative(const SampledCurve& f);

}  // namespace skma
