#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skma/align.hpp"
#include "skma/criterion.hpp"
#include "skma/curve.hpp"
#include "skma/metrics.hpp"
#include "skma/partition.hpp"
#include "skma/weight.hpp"

namespace skma {

enum class EngineMode { sparse_kma, kma };

struct EngineConfig {
  std::size_t k = 2;
  MetricKind metric = MetricKind::l2_distance;
  double m = 0.0;  // sparsity fraction of mu(D)
  WarpBounds bounds{0.01, 0.01};
  double tol = 0.001;
  std::size_t max_iter = 50;
  std::size_t resolution = 200;
  std::uint64_t seed = 0;
  EngineMode mode = EngineMode::sparse_kma;
  bool robust_templates = false;
  // Drop the mean-|dw| condition from the stopping rule; used when
  // comparing against the KMA baseline so both modes stop on the same
  // criteria.
  bool stop_on_weight_change = true;
  double loess_span = 0.3;
  std::size_t jobs = 0;  // 0: hardware concurrency
  // weight updates wait until the clustering-and-alignment sweeps settle
  // (labels unchanged and the distance change below tol); 0 updates the
  // weight every sweep instead
  bool weight_update_on_stable = true;
};

struct IterationRecord {
  double objective = 0.0;           // integral of w * g
  double mean_distance = 0.0;       // mean score-to-template (mode metric)
  double mean_weight_change = 0.0;  // mean |w_t - w_{t-1}|
  std::size_t labels_changed = 0;
};

// Tripwires for the per-step improvement, weight-constraint and warp
// normalization guarantees; all zero on a healthy fit except
// objective_dips, which tolerates template re-estimation effects.
struct StepCounters {
  std::size_t warp_step_violations = 0;
  std::size_t assign_step_violations = 0;
  std::size_t weight_step_violations = 0;
  std::size_t weight_constraint_violations = 0;
  std::size_t objective_dips = 0;
  std::size_t empty_overlap_pairs = 0;
  std::size_t degenerate_warps = 0;
  double max_normalization_residual = 0.0;
};

struct FitResult {
  Partition labels;
  std::vector<AffineWarp> warps;  // cumulative, normalized
  WeightFunction weight;          // uniform placeholder in KMA mode
  std::vector<Template> templates;
  std::vector<IterationRecord> history;
  std::size_t iterations = 0;
  bool converged = false;
  StepCounters counters;
  UniformGrid grid;
  std::vector<SampledCurve> aligned;
  std::vector<std::string> curve_ids;
  std::vector<std::string> warnings;
};

// The three-step alternating loop: (1) per-curve warp search against the
// cluster template under the current weight, cumulative-warp composition
// and normalization; (2) template re-estimation and reassignment; (3) in
// sparse mode, criterion profile and weight update. Random label
// initialization from the seeded generator; w starts uniform. Stops when
// the mean distance change, mean |dw| (unless disabled) and label changes
// are all below tolerance, or at max_iter.
FitResult fit(const std::vector<SampledCurve>& curves, const EngineConfig& config);

// Same loop with w held uniform and step 3 skipped; K = 1 is allowed.
FitResult fit_kma_baseline(const std::vector<SampledCurve>& curves,
                           EngineConfig config);

// Integral of w * g for the mode's criterion over already-warped curves.
double objective(const std::vector<SampledCurve>& warped, const Partition& partition,
                 const WeightFunction& w, MetricKind kind);

struct KDiagnostics {
  std::size_t k = 0;
  std::vector<double> within;  // per-curve unweighted distance (or similarity)
  double median = 0.0;
  double p_vs_prev = 0.0;  // rank-sum p against the previous K; NaN for the first
  std::size_t iterations = 0;
  bool converged = false;
};

struct DiagnosticsReport {
  MetricKind kind = MetricKind::l2_distance;
  std::vector<KDiagnostics> per_k;
};

// Runs fit for each K in [k_lo, k_hi] and reports the within-cluster
// distance (L2) or similarity (H1) samples of each curve to its assigned
// template under the unweighted metric, with two-sided rank-sum p-values
// between consecutive K.
DiagnosticsReport tune_k(const std::vector<SampledCurve>& curves,
                         const EngineConfig& config, std::size_t k_lo,
                         std::size_t k_hi);

}  // namespace skma
