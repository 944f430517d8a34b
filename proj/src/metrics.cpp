#include "skma/metrics.hpp"

#include <cmath>

#include "skma/kernels.hpp"

namespace skma {

namespace {

void require_comparable(const SampledCurve& f1, const SampledCurve& f2) {
  if (!(f1.grid() == f2.grid()))
    throw InvalidArgument("curves must share the common grid");
  if (f1.dims() != f2.dims())
    throw InvalidArgument("curves must share the codomain dimension");
}

// Copies of (a, b) with each masked wherever the other is missing, so that
// single-array kernels see the pairwise overlap.
std::pair<std::vector<double>, std::vector<double>> overlap_masked(
    std::span<const double> a, std::span<const double> b) {
  std::vector<double> ma(a.begin(), a.end());
  std::vector<double> mb(b.begin(), b.end());
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (is_missing(a[j]) || is_missing(b[j])) {
      ma[j] = kMissing;
      mb[j] = kMissing;
    }
  }
  return {std::move(ma), std::move(mb)};
}

}  // namespace

DerivativeCurve estimate_derivative(const SampledCurve& f) {
  const UniformGrid& g = f.grid();
  const double inv_step = 1.0 / g.step;
  const double inv_2step = 0.5 / g.step;
  std::vector<std::vector<double>> out(f.dims());
  for (std::size_t d = 0; d < f.dims(); ++d) {
    const std::vector<double>& v = f.dim(d);
    std::size_t finite = 0;
    for (double x : v)
      if (!is_missing(x)) ++finite;
    if (finite < 3)
      throw InvalidArgument("estimate_derivative: fewer than 3 samples in curve " +
                            f.id());
    std::vector<double>& dv = out[d];
    dv.assign(g.count, kMissing);
    for (std::size_t j = 0; j < g.count; ++j) {
      if (is_missing(v[j])) continue;
      const bool left = j > 0 && !is_missing(v[j - 1]);
      const bool right = j + 1 < g.count && !is_missing(v[j + 1]);
      if (left && right)
        dv[j] = (v[j + 1] - v[j - 1]) * inv_2step;
      else if (right)
        dv[j] = (v[j + 1] - v[j]) * inv_step;
      else if (left)
        dv[j] = (v[j] - v[j - 1]) * inv_step;
      // isolated finite sample: derivative stays missing
    }
  }
  return DerivativeCurve{
      SampledCurve(f.id(), f.domain(), g, std::move(out))};
}

double dist_l2(const SampledCurve& f1, const SampledCurve& f2) {
  require_comparable(f1, f2);
  double total = 0.0;
  std::int64_t count = 0;
  for (std::size_t d = 0; d < f1.dims(); ++d) {
    const auto r = kernels::sq_diff_sum(f1.dim(d).data(), f2.dim(d).data(),
                                        f1.grid().count);
    total += r.sum;
    count = r.count;  // masks agree across dimensions
  }
  if (count < 2)
    throw EmptyOverlapError("dist_l2: overlap of " + f1.id() + " and " + f2.id() +
                            " has fewer than 2 points");
  const double mu = static_cast<double>(count) * f1.grid().step;
  return std::sqrt(total * f1.grid().step) / std::sqrt(mu);
}

double dist_l2_weighted(const SampledCurve& f1, const SampledCurve& f2,
                        std::span<const double> w) {
  require_comparable(f1, f2);
  if (w.size() != f1.grid().count)
    throw InvalidArgument("dist_l2_weighted: weight length != grid count");
  double total = 0.0;
  std::int64_t count = 0;
  for (std::size_t d = 0; d < f1.dims(); ++d) {
    const auto r = kernels::weighted_sq_diff_sum(f1.dim(d).data(), f2.dim(d).data(),
                                                 w.data(), f1.grid().count);
    total += r.sum;
    count = r.count;
  }
  if (count < 2)
    throw EmptyOverlapError("dist_l2_weighted: overlap of " + f1.id() + " and " +
                            f2.id() + " has fewer than 2 points");
  const double mu = static_cast<double>(count) * f1.grid().step;
  return std::sqrt(total * f1.grid().step) / std::sqrt(mu);
}

double similarity_h1(const SampledCurve& f1, const SampledCurve& f2) {
  require_comparable(f1, f2);
  const DerivativeCurve d1 = estimate_derivative(f1);
  const DerivativeCurve d2 = estimate_derivative(f2);
  double total = 0.0;
  for (std::size_t d = 0; d < f1.dims(); ++d) {
    const auto [m1, m2] = overlap_masked(d1.curve.dim(d), d2.curve.dim(d));
    const auto cross = kernels::dot_sum(m1.data(), m2.data(), m1.size());
    if (cross.count < 2)
      throw EmptyOverlapError("similarity_h1: overlap of " + f1.id() + " and " +
                              f2.id() + " has fewer than 2 points");
    const double n1 = kernels::dot_sum(m1.data(), m1.data(), m1.size()).sum;
    const double n2 = kernels::dot_sum(m2.data(), m2.data(), m2.size()).sum;
    if (!(n1 > 0.0) || !(n2 > 0.0))
      throw DegenerateSimilarityError(
          "similarity_h1: zero H1 semi-norm for curve " +
          ((n1 > 0.0) ? f2.id() : f1.id()));
    total += cross.sum / std::sqrt(n1 * n2);
  }
  return total / static_cast<double>(f1.dims());
}

std::vector<double> h1_seminorms(const SampledCurve& f) {
  const DerivativeCurve df = estimate_derivative(f);
  std::vector<double> norms(f.dims());
  for (std::size_t d = 0; d < f.dims(); ++d) {
    const std::vector<double>& v = df.curve.dim(d);
    const double sq = kernels::dot_sum(v.data(), v.data(), v.size()).sum;
    norms[d] = std::sqrt(sq * f.grid().step);
  }
  return norms;
}

SampledCurve normalized_derivative(const SampledCurve& f) {
  DerivativeCurve df = estimate_derivative(f);
  std::vector<std::vector<double>> out = df.curve.values();
  for (std::size_t d = 0; d < f.dims(); ++d) {
    const double sq =
        kernels::dot_sum(out[d].data(), out[d].data(), out[d].size()).sum;
    const double norm = std::sqrt(sq * f.grid().step);
    if (!(norm > 0.0))
      throw DegenerateSimilarityError(
          "normalized_derivative: zero H1 semi-norm for curve " + f.id());
    const double inv = 1.0 / norm;
    for (double& x : out[d])
      if (!is_missing(x)) x *= inv;
  }
  return SampledCurve(f.id(), f.domain(), f.grid(), std::move(out));
}

}  // namespace skma
