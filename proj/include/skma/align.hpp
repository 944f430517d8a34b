#pragma once

#include <optional>
#include <vector>

#include "skma/curve.hpp"
#include "skma/metrics.hpp"
#include "skma/partition.hpp"
#include "skma/warp.hpp"
#include "skma/weight.hpp"

namespace skma {

// Per-iteration warp search box: a in [1-eps_a, 1+eps_a], b in [-eps_b, eps_b].
struct WarpBounds {
  double eps_a = 0.0;
  double eps_b = 0.0;

  WarpBounds() = default;
  WarpBounds(double ea, double eb) : eps_a(ea), eps_b(eb) {
    if (!(eps_a >= 0.0) || !(eps_b >= 0.0) || !(1.0 - eps_a > 0.0))
      throw InvalidArgument("WarpBounds requires eps_a in [0,1), eps_b >= 0");
  }
};

// Cluster centroid. `curve` is the point-wise mean of member values; in the
// H1 mode `uprofile` additionally holds the mean normalized-derivative
// profile, which is what alignment and assignment match against.
struct Template {
  std::size_t cluster = 0;
  std::optional<SampledCurve> curve;
  std::optional<SampledCurve> uprofile;

  const SampledCurve& match_curve(MetricKind kind) const {
    return kind == MetricKind::h1_similarity ? *uprofile : *curve;
  }
};

struct TemplateOptions {
  bool robust = false;     // Loess over pooled member samples
  double loess_span = 0.3; // nearest-neighbour fraction of pooled points
};

// Point-wise mean of the member curves at every grid point reaching
// min_count = min(|members|, max(2, ceil(0.05 |members|))) observations;
// robust mode runs a tricube local linear regression over the pooled member
// samples instead, supported on the union of member domains.
SampledCurve mean_curve(const std::vector<SampledCurve>& curves,
                        const std::vector<std::size_t>& members,
                        const TemplateOptions& opts, const std::string& id);

// Template for one cluster. `uprofiles` must be the normalized-derivative
// curves (same indexing) and is required in the H1 mode.
Template estimate_template(const std::vector<SampledCurve>& curves,
                           const std::vector<std::size_t>& members,
                           std::size_t cluster, MetricKind kind,
                           const TemplateOptions& opts,
                           const std::vector<SampledCurve>* uprofiles = nullptr);

struct WarpResult {
  AffineWarp warp;
  double score = 0.0;           // minimized: d_w (L2) or negated w-similarity (H1)
  double identity_score = 0.0;  // score of the identity candidate
  bool degenerate = false;      // every candidate was degenerate
};

// Best warp of `f` against the template over the bounds box: a 21x21
// candidate grid followed by one golden-section refinement pass per
// coordinate. Deterministic; the identity candidate is always evaluated,
// so the returned score is never worse than identity_score. In the H1
// mode `f` must be the curve's normalized-derivative profile.
//
// `base` composes under every candidate: the search covers h = base o d
// with d ranging over the box, and the returned warp is the composition.
// The identity candidate is then `base` itself, which lets an iterative
// caller guarantee that re-searching never loses ground.
WarpResult best_warp(const SampledCurve& f, const Template& tmpl,
                     const WeightFunction& w, const WarpBounds& bounds,
                     MetricKind kind,
                     const AffineWarp& base = AffineWarp::identity());

// Score of `f` warped by `h` against the template; +inf when degenerate.
// L2: weighted normalized distance. H1: negated weighted similarity
// integral (so smaller is always better).
double warp_score(const SampledCurve& f, const AffineWarp& h, const Template& tmpl,
                  const WeightFunction& w, MetricKind kind);

// Parameter-wise mean warp per cluster (the point-wise mean of affine maps
// is affine); identity for empty clusters.
std::vector<AffineWarp> cluster_mean_warps(const std::vector<AffineWarp>& warps,
                                           const Partition& partition);

// Eq.-style warp normalization: within each cluster the parameter means of
// the cumulative warps become exactly (1, 0) by composing every member with
// the inverse of the cluster's mean warp.
std::vector<AffineWarp> normalize_warps(const std::vector<AffineWarp>& warps,
                                        const Partition& partition);

struct AssignResult {
  Partition partition;
  std::size_t changed = 0;
  // Sums of finite scores under old and new labels, and the count of curves
  // whose score worsened (zero by construction; a tripwire for the per-step
  // improvement assertion). Repairs happen afterwards and are not counted.
  double old_score_sum = 0.0;
  double new_score_sum = 0.0;
  std::size_t violations = 0;
  std::size_t repaired = 0;
};

// Each curve moves to its best-scoring template (ties toward the lowest
// cluster index; a tie with the current cluster keeps it). Empty clusters
// are repaired by stealing the worst-fitting curve from the largest
// cluster. In the H1 mode `curves` must be the normalized-derivative
// profiles.
AssignResult assign_clusters(const std::vector<SampledCurve>& curves,
                             const std::vector<Template>& templates,
                             const WeightFunction& w, MetricKind kind,
                             const Partition& current);

}  // namespace skma
