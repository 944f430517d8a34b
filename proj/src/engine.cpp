#include "skma/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "skma/kernels.hpp"
#include "skma/rng.hpp"
#include "skma/stats.hpp"

namespace skma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += jobs) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

SampledCurve scaled(const SampledCurve& c, double factor) {
  std::vector<std::vector<double>> values = c.values();
  for (auto& dim : values)
    for (double& v : dim)
      if (!is_missing(v)) v *= factor;
  return SampledCurve(c.id(), c.domain(), c.grid(), std::move(values));
}

double integral_w_g(const WeightFunction& w, const CriterionProfile& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.values.size(); ++j) s += w.values[j] * g.values[j];
  return s * g.grid.step;
}

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::fabs(a[j] - b[j]);
  return s / static_cast<double>(a.size());
}

// Each empty cluster steals the worst-fitting curve (largest score) of the
// largest cluster.
void repair_empty_clusters(Partition& part, const std::vector<double>& scores) {
  std::vector<std::size_t> sizes = part.sizes();
  for (std::size_t empty = 0; empty < part.k; ++empty) {
    if (sizes[empty] > 0) continue;
    std::size_t donor = 0;
    for (std::size_t c = 1; c < part.k; ++c)
      if (sizes[c] > sizes[donor]) donor = c;
    if (sizes[donor] < 2) continue;
    std::size_t worst = part.labels.size();
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
      if (part.labels[i] != donor) continue;
      if (worst == part.labels.size() || scores[i] > scores[worst]) worst = i;
    }
    part.labels[worst] = empty;
    --sizes[donor];
    ++sizes[empty];
  }
}

// Random labels with deterministic empty-cluster repair: each empty cluster
// takes the lowest-index curve of the largest cluster.
Partition random_partition(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = rng.next_below(k);
  Partition part(std::move(labels), k);
  for (;;) {
    std::vector<std::size_t> sizes = part.sizes();
    std::size_t empty = k;
    for (std::size_t c = 0; c < k; ++c)
      if (sizes[c] == 0) {
        empty = c;
        break;
      }
    if (empty == k) break;
    std::size_t donor = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (sizes[c] > sizes[donor]) donor = c;
    if (sizes[donor] < 2) break;
    for (std::size_t i = 0; i < n; ++i)
      if (part.labels[i] == donor) {
        part.labels[i] = empty;
        break;
      }
  }
  return part;
}

struct Workspace {
  const EngineConfig& cfg;
  bool h1;
  UniformGrid grid;
  std::vector<SampledCurve> base;    // original curves, own grids
  std::vector<SampledCurve> ubase;   // H1: normalized derivatives, own grids
  std::vector<SampledCurve> base_common;   // originals resampled once
  std::vector<SampledCurve> ubase_common;  // H1 profiles resampled once
  std::vector<SampledCurve> aligned;       // base o cumulative warp
  std::vector<SampledCurve> ualigned;
  StepCounters counters;
  std::vector<std::string> warnings;

  Workspace(const std::vector<SampledCurve>& curves, const EngineConfig& config)
      : cfg(config),
        h1(config.metric == MetricKind::h1_similarity),
        grid(common_grid(curves, config.resolution)) {
    base = curves;
    const AffineWarp id = AffineWarp::identity();
    for (const SampledCurve& c : curves)
      base_common.push_back(curve_warp(c, id, grid));
    if (h1)
      for (const SampledCurve& c : curves) {
        ubase.push_back(normalized_derivative(c));
        ubase_common.push_back(curve_warp(ubase.back(), id, grid));
      }
  }

  // warp-search inputs: candidate warps apply to these
  const std::vector<SampledCurve>& match_base() const {
    return h1 ? ubase_common : base_common;
  }

  void align_all(const std::vector<AffineWarp>& warps) {
    const std::size_t n = base.size();
    aligned.clear();
    aligned.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      aligned.push_back(curve_warp(base[i], warps[i], grid));
    if (h1) {
      ualigned.clear();
      ualigned.reserve(n);
      // d/dx f(h(x)) = a f'(h(x)) and |f o h| = |f| / sqrt(a), so the
      // normalized derivative warps as sqrt(a) * (u o h).
      for (std::size_t i = 0; i < n; ++i)
        ualigned.push_back(
            scaled(curve_warp(ubase[i], warps[i], grid), std::sqrt(warps[i].a)));
    }
  }

  const std::vector<SampledCurve>& match_curves() const {
    return h1 ? ualigned : aligned;
  }

  std::vector<Template> make_templates(const Partition& part) {
    TemplateOptions opts{cfg.robust_templates, cfg.loess_span};
    std::vector<Template> out;
    out.reserve(part.k);
    const auto members = part.members();
    for (std::size_t k = 0; k < part.k; ++k)
      out.push_back(estimate_template(aligned, members[k], k, cfg.metric, opts,
                                      h1 ? &ualigned : nullptr));
    return out;
  }

  CriterionProfile make_criterion(const Partition& part) {
    if (h1) return wcsim_from_profiles(ualigned, part);
    if (equal_masks(aligned)) return bcss_centroid_fast(aligned, part);
    PairDiagnostics diag;
    CriterionProfile g = bcss_pairwise(aligned, part, &diag);
    counters.empty_overlap_pairs += diag.empty_overlap_pairs;
    return g;
  }

  double normalization_residual(const std::vector<AffineWarp>& warps,
                                const Partition& part) const {
    std::vector<double> ma(part.k, 0.0), mb(part.k, 0.0);
    const std::vector<std::size_t> sizes = part.sizes();
    for (std::size_t i = 0; i < warps.size(); ++i) {
      ma[part.labels[i]] += warps[i].a;
      mb[part.labels[i]] += warps[i].b;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < part.k; ++k) {
      if (sizes[k] == 0) continue;
      const double n = static_cast<double>(sizes[k]);
      worst = std::max(worst, std::fabs(ma[k] / n - 1.0));
      worst = std::max(worst, std::fabs(mb[k] / n));
    }
    return worst;
  }
};

void validate_config(const std::vector<SampledCurve>& curves,
                     const EngineConfig& cfg) {
  if (curves.empty()) throw InvalidArgument("fit: empty curve set");
  if (cfg.k == 0) throw InvalidArgument("fit: K must be positive");
  if (curves.size() < cfg.k) throw InvalidArgument("fit: fewer curves than clusters");
  if (cfg.mode == EngineMode::sparse_kma && cfg.k < 2)
    throw InvalidArgument(
        "fit: sparse mode requires K >= 2; the weight function is undefined "
        "for a single cluster");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("fit: tol must be positive");
  if (cfg.max_iter == 0) throw InvalidArgument("fit: max_iter must be positive");
  if (!(cfg.m >= 0.0 && cfg.m < 1.0))
    throw InvalidArgument("fit: sparsity fraction must lie in [0, 1)");
  const std::size_t dims = curves.front().dims();
  for (const SampledCurve& c : curves)
    if (c.dims() != dims)
      throw InvalidArgument("fit: curves disagree on codomain dimension");
}

}  // namespace

FitResult fit(const std::vector<SampledCurve>& curves, const EngineConfig& cfg) {
  validate_config(curves, cfg);
  const std::size_t n = curves.size();
  const bool sparse = cfg.mode == EngineMode::sparse_kma;

  Workspace ws(curves, cfg);
  std::vector<AffineWarp> cum(n);
  // one warp trajectory per (curve, template): a curve tracks every
  // template across iterations, so reassignment never has to cross a
  // fit-quality valley in single per-iteration steps
  std::vector<std::vector<AffineWarp>> traj(n, std::vector<AffineWarp>(cfg.k));
  ws.align_all(cum);

  Rng rng(cfg.seed);
  Partition part = random_partition(n, cfg.k, rng);

  WeightFunction w = WeightFunction::uniform(ws.grid);
  std::vector<Template> templates = ws.make_templates(part);

  std::vector<IterationRecord> history;
  double prev_dist = kNaN;
  double prev_obj = kNaN;
  bool converged = false;

  for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
    // steps 1-2, KMA sweep: every curve re-searches its total warp inside
    // the fixed box against every template and takes the best-scoring
    // (warp, cluster) pair. The curve's previous state is always an
    // explicit candidate, so the chosen score can never be worse than
    // keeping the old warp and label (the per-step assertions below).
    std::vector<AffineWarp> chosen_warp(n);
    std::vector<std::size_t> chosen_label(n);
    std::vector<double> chosen_score(n);
    std::vector<char> warp_viol(n, 0), assign_viol(n, 0), degen(n, 0);
    const auto& match = ws.match_base();
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      const std::size_t cur = part.labels[i];
      // incumbent: keep the old warp and label (the identity increment of
      // the own-template search); candidates must strictly beat it, so
      // ties keep the current state and otherwise resolve toward the
      // lowest cluster index
      const double prev_score =
          warp_score(match[i], traj[i][cur], templates[cur], w, cfg.metric);
      std::size_t best_k = cur;
      double best_s = prev_score;
      double own_search = prev_score;
      bool any_finite = std::isfinite(prev_score);
      for (std::size_t k = 0; k < part.k; ++k) {
        const WarpResult r = best_warp(match[i], templates[k], w, cfg.bounds,
                                       cfg.metric, traj[i][k]);
        if (!r.degenerate) traj[i][k] = r.warp;
        if (k == cur) own_search = r.score;
        if (!r.degenerate) any_finite = true;
        if (r.score < best_s) {
          best_k = k;
          best_s = r.score;
        }
      }
      if (!any_finite) degen[i] = 1;
      chosen_warp[i] = traj[i][best_k];
      chosen_label[i] = best_k;
      chosen_score[i] = best_s;
      if (best_s > prev_score) warp_viol[i] = 1;
      if (best_s > std::min(own_search, prev_score)) assign_viol[i] = 1;
    });
    std::size_t labels_changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      cum[i] = chosen_warp[i];
      if (warp_viol[i]) ++ws.counters.warp_step_violations;
      if (assign_viol[i]) ++ws.counters.assign_step_violations;
      if (degen[i]) ++ws.counters.degenerate_warps;
      if (chosen_label[i] != part.labels[i]) ++labels_changed;
      part.labels[i] = chosen_label[i];
    }
    repair_empty_clusters(part, chosen_score);
    ws.align_all(cum);

    // warp normalization against the iteration's final labels; every
    // trajectory is normalized by its own target cluster's factor so its
    // fit against the re-estimated template is preserved
    {
      const std::vector<AffineWarp> means = cluster_mean_warps(cum, part);
      std::vector<AffineWarp> inv(part.k);
      for (std::size_t k = 0; k < part.k; ++k) inv[k] = invert(means[k]);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < part.k; ++k)
          traj[i][k] = compose(traj[i][k], inv[k]);
      for (std::size_t i = 0; i < n; ++i) cum[i] = traj[i][part.labels[i]];
    }
    ws.align_all(cum);
    ws.counters.max_normalization_residual =
        std::max(ws.counters.max_normalization_residual,
                 ws.normalization_residual(cum, part));
    templates = ws.make_templates(part);

    // within-cluster distances; the recorded value is the plain functional
    // measure (Eq.-3 distance or the H1 similarity), not its weighted
    // variant, so sparse and KMA runs report the same yardstick. The
    // stopping comparison happens on the squared-distance scale, the
    // quantity the variational objective integrates.
    double dist_sum = 0.0, dist_sq_sum = 0.0;
    std::size_t dist_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Template& tmpl = templates[part.labels[i]];
      try {
        const double s = ws.h1 ? similarity_h1(ws.aligned[i], *tmpl.curve)
                               : dist_l2(ws.aligned[i], *tmpl.curve);
        if (std::isfinite(s)) {
          dist_sum += s;
          dist_sq_sum += s * s;
          ++dist_count;
        }
      } catch (const Error&) {
        // no usable overlap; leave the curve out of the mean
      }
    }
    const double mean_dist =
        dist_count > 0 ? dist_sum / static_cast<double>(dist_count) : kNaN;
    // H1 similarities already live on a bounded scale; distances enter
    // squared
    const double stop_dist =
        dist_count == 0 ? kNaN
        : ws.h1         ? mean_dist
                        : dist_sq_sum / static_cast<double>(dist_count);
    const bool inner_stable = labels_changed == 0 && std::isfinite(prev_dist) &&
                              std::fabs(stop_dist - prev_dist) < cfg.tol;

    // step 3: weight update (sparse mode). By default it waits for the
    // clustering-and-alignment sweeps to settle, so each weight reflects a
    // stable partition rather than a transient of the first iterations.
    double mean_dw = 0.0;
    double wchange_sq = 0.0;  // integral of (w_t - w_{t-1})^2
    double obj = 0.0;
    bool weight_updated = false;
    if (part.k >= 2) {
      const CriterionProfile g = ws.make_criterion(part);
      if (sparse && (inner_stable || !cfg.weight_update_on_stable)) {
        WeightFunction w_new = solve_weight(g, SparsityParam(cfg.m));
        const WeightReport old_rep = verify_weight(w);
        const double required =
            cfg.m * static_cast<double>(ws.grid.count) * ws.grid.step;
        const bool old_feasible = old_rep.norm_ok && old_rep.nonneg_ok &&
                                  old_rep.zero_measure >=
                                      required - ws.grid.step - 1e-12;
        if (old_feasible) {
          const double before = integral_w_g(w, g);
          const double after = integral_w_g(w_new, g);
          if (after + 1e-9 * std::max(1.0, std::fabs(before)) < before)
            ++ws.counters.weight_step_violations;
        }
        mean_dw = mean_abs_diff(w_new.values, w.values);
        for (std::size_t j = 0; j < w.values.size(); ++j) {
          const double d = w_new.values[j] - w.values[j];
          wchange_sq += d * d;
        }
        wchange_sq *= ws.grid.step;
        w = std::move(w_new);
        weight_updated = true;
        const WeightReport rep = verify_weight(w);
        if (!rep.nonneg_ok || !rep.sparsity_ok || std::fabs(rep.norm - 1.0) > 1e-9)
          ++ws.counters.weight_constraint_violations;
      }
      obj = integral_w_g(w, g);
    }

    if (std::isfinite(prev_obj) &&
        obj < prev_obj - 1e-6 * std::max(1.0, std::fabs(prev_obj))) {
      ++ws.counters.objective_dips;
      ws.warnings.push_back("objective dipped at iteration " +
                            std::to_string(iter) + ": " + std::to_string(prev_obj) +
                            " -> " + std::to_string(obj));
    }

    history.push_back(IterationRecord{obj, mean_dist, mean_dw, labels_changed});

    if (inner_stable) {
      const bool weight_ok =
          !sparse || !cfg.stop_on_weight_change ||
          (weight_updated && wchange_sq < cfg.tol);
      if (weight_ok || (sparse && !cfg.stop_on_weight_change)) {
        converged = true;
        prev_dist = stop_dist;
        prev_obj = obj;
        break;
      }
    }
    prev_dist = stop_dist;
    prev_obj = obj;
  }

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const SampledCurve& c : curves) ids.push_back(c.id());

  FitResult result{std::move(part),
                   std::move(cum),
                   std::move(w),
                   std::move(templates),
                   std::move(history),
                   0,
                   converged,
                   ws.counters,
                   ws.grid,
                   std::move(ws.aligned),
                   std::move(ids),
                   std::move(ws.warnings)};
  result.iterations = result.history.size();
  return result;
}

FitResult fit_kma_baseline(const std::vector<SampledCurve>& curves,
                           EngineConfig config) {
  config.mode = EngineMode::kma;
  return fit(curves, config);
}

double objective(const std::vector<SampledCurve>& warped, const Partition& partition,
                 const WeightFunction& w, MetricKind kind) {
  CriterionProfile g =
      kind == MetricKind::h1_similarity
          ? wcsim_pointwise(warped, partition)
          : (equal_masks(warped) ? bcss_centroid_fast(warped, partition)
                                 : bcss_pairwise(warped, partition));
  if (w.values.size() != g.values.size())
    throw InvalidArgument("objective: weight grid does not match curves");
  return integral_w_g(w, g);
}

DiagnosticsReport tune_k(const std::vector<SampledCurve>& curves,
                         const EngineConfig& config, std::size_t k_lo,
                         std::size_t k_hi) {
  if (k_lo > k_hi) throw InvalidArgument("tune_k: empty K range");
  const std::size_t min_k = config.mode == EngineMode::sparse_kma ? 2 : 1;
  if (k_lo < min_k)
    throw InvalidArgument("tune_k: K below the mode's minimum");
  if (k_hi >= curves.size()) throw InvalidArgument("tune_k: K must stay below n");

  DiagnosticsReport report;
  report.kind = config.metric;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    EngineConfig cfg = config;
    cfg.k = k;
    const FitResult res = fit(curves, cfg);

    KDiagnostics diag;
    diag.k = k;
    diag.iterations = res.iterations;
    diag.converged = res.converged;
    for (std::size_t i = 0; i < res.aligned.size(); ++i) {
      const Template& tmpl = res.templates[res.labels.labels[i]];
      double v = kNaN;
      try {
        v = config.metric == MetricKind::h1_similarity
                ? similarity_h1(res.aligned[i], *tmpl.curve)
                : dist_l2(res.aligned[i], *tmpl.curve);
      } catch (const Error&) {
        // no usable overlap with the template: drop the curve from the sample
      }
      if (std::isfinite(v)) diag.within.push_back(v);
    }
    std::vector<double> sorted = diag.within;
    std::sort(sorted.begin(), sorted.end());
    diag.median = sorted.empty()
                      ? kNaN
                      : (sorted.size() % 2 == 1
                             ? sorted[sorted.size() / 2]
                             : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                      sorted[sorted.size() / 2]));
    diag.p_vs_prev = kNaN;
    if (!report.per_k.empty() && !report.per_k.back().within.empty() &&
        !diag.within.empty())
      diag.p_vs_prev =
          rank_sum_test(report.per_k.back().within, diag.within).p_value;
    report.per_k.push_back(std::move(diag));
  }
  return report;
}

}  // namespace skma
