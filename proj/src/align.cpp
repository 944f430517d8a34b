#include "skma/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skma/kernels.hpp"

namespace skma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t template_min_count(std::size_t n_members) {
  const std::size_t base = std::max<std::size_t>(
      2, static_cast<std::size_t>(
             std::ceil(0.05 * static_cast<double>(n_members))));
  return std::min(n_members, base);
}

// Tricube local linear regression over pooled member samples, evaluated on
// the grid wherever at least one member is observed.
std::vector<std::vector<double>> loess_fit(const std::vector<SampledCurve>& curves,
                                           const std::vector<std::size_t>& members,
                                           const UniformGrid& grid, double span,
                                           std::size_t dims) {
  std::vector<double> xs;
  std::vector<std::vector<double>> vs(dims);
  std::vector<char> observed(grid.count, 0);
  for (std::size_t i : members) {
    const SampledCurve& c = curves[i];
    for (std::size_t j = 0; j < grid.count; ++j) {
      if (is_missing(c.dim(0)[j])) continue;
      observed[j] = 1;
      xs.push_back(grid.x(j));
      for (std::size_t d = 0; d < dims; ++d) vs[d].push_back(c.dim(d)[j]);
    }
  }
  const std::size_t n = xs.size();
  const std::size_t q =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(
                                   span * static_cast<double>(n))));

  std::vector<std::vector<double>> out(dims,
                                       std::vector<double>(grid.count, kMissing));
  std::vector<double> dist(n);
  for (std::size_t j = 0; j < grid.count; ++j) {
    if (!observed[j]) continue;
    const double x0 = grid.x(j);
    for (std::size_t s = 0; s < n; ++s) dist[s] = std::fabs(xs[s] - x0);
    std::vector<double> sel = dist;
    std::nth_element(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(
                                      std::min(q, n) - 1),
                     sel.end());
    const double h = sel[std::min(q, n) - 1];

    for (std::size_t d = 0; d < dims; ++d) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        double wt;
        if (h > 0.0) {
          const double u = dist[s] / h;
          if (u >= 1.0) continue;
          const double c = 1.0 - u * u * u;
          wt = c * c * c;
        } else {
          if (dist[s] > 0.0) continue;
          wt = 1.0;
        }
        const double dx = xs[s] - x0;
        s0 += wt;
        s1 += wt * dx;
        s2 += wt * dx * dx;
        t0 += wt * vs[d][s];
        t1 += wt * dx * vs[d][s];
      }
      if (s0 <= 0.0) continue;
      const double denom = s0 * s2 - s1 * s1;
      // near-singular local design: fall back to the weighted mean
      out[d][j] = (std::fabs(denom) > 1e-12 * s0 * (s2 + 1e-300))
                      ? (s2 * t0 - s1 * t1) / denom
                      : t0 / s0;
    }
  }
  return out;
}

}  // namespace

SampledCurve mean_curve(const std::vector<SampledCurve>& curves,
                        const std::vector<std::size_t>& members,
                        const TemplateOptions& opts, const std::string& id) {
  if (members.empty()) throw InvalidArgument("mean_curve: empty member set");
  const UniformGrid grid = curves[members.front()].grid();
  const std::size_t dims = curves[members.front()].dims();

  std::vector<std::vector<double>> values;
  if (opts.robust) {
    values = loess_fit(curves, members, grid, opts.loess_span, dims);
  } else {
    const double min_count = static_cast<double>(template_min_count(members.size()));
    values.assign(dims, std::vector<double>(grid.count, kMissing));
    std::vector<double> acc(grid.count), cnt(grid.count);
    for (std::size_t d = 0; d < dims; ++d) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(cnt.begin(), cnt.end(), 0.0);
      for (std::size_t i : members)
        kernels::accumulate_finite(acc.data(), cnt.data(), curves[i].dim(d).data(),
                                   grid.count);
      for (std::size_t j = 0; j < grid.count; ++j)
        if (cnt[j] >= min_count) values[d][j] = acc[j] / cnt[j];
    }
  }

  try {
    return SampledCurve::from_values(id, grid, std::move(values));
  } catch (const InvalidArgument&) {
    throw Error("mean_curve: no grid point reaches the minimum member count");
  }
}

Template estimate_template(const std::vector<SampledCurve>& curves,
                           const std::vector<std::size_t>& members,
                           std::size_t cluster, MetricKind kind,
                           const TemplateOptions& opts,
                           const std::vector<SampledCurve>* uprofiles) {
  Template t;
  t.cluster = cluster;
  const std::string id = "template_" + std::to_string(cluster + 1);
  t.curve = mean_curve(curves, members, opts, id);
  if (kind == MetricKind::h1_similarity) {
    if (uprofiles == nullptr)
      throw InvalidArgument("estimate_template: H1 mode needs derivative profiles");
    t.uprofile = mean_curve(*uprofiles, members, opts, id + "_u");
  }
  return t;
}

double warp_score(const SampledCurve& f, const AffineWarp& h, const Template& tmpl,
                  const WeightFunction& w, MetricKind kind) {
  const SampledCurve& target = tmpl.match_curve(kind);
  const UniformGrid& grid = f.grid();
  if (!(grid == target.grid()) || !(grid == w.grid))
    throw InvalidArgument("warp_score: curve, template and weight grids differ");

  const double p0 = (h.a * grid.start + h.b - grid.start) / grid.step;
  const double dp = h.a;

  static thread_local std::vector<double> warped;
  warped.resize(grid.count);

  double total = 0.0;
  std::int64_t count = 0;
  for (std::size_t d = 0; d < f.dims(); ++d) {
    kernels::warp_lerp(warped.data(), grid.count, f.dim(d).data(), grid.count, p0,
                       dp);
    const auto r =
        kind == MetricKind::h1_similarity
            ? kernels::weighted_dot_sum(warped.data(), target.dim(d).data(),
                                        w.values.data(), grid.count)
            : kernels::weighted_sq_diff_sum(warped.data(), target.dim(d).data(),
                                            w.values.data(), grid.count);
    total += r.sum;
    count = r.count;
  }
  if (count < 2) return kInf;

  if (kind == MetricKind::h1_similarity) {
    // u(f o h) = sqrt(a) * (u(f) o h); maximize the weighted similarity
    // integral, negated so callers always minimize.
    return -std::sqrt(h.a) * total * grid.step /
           static_cast<double>(f.dims());
  }
  const double mu = static_cast<double>(count) * grid.step;
  return std::sqrt(total * grid.step) / std::sqrt(mu);
}

WarpResult best_warp(const SampledCurve& f, const Template& tmpl,
                     const WeightFunction& w, const WarpBounds& bounds,
                     MetricKind kind, const AffineWarp& base) {
  WarpResult res;
  res.warp = base;
  res.score = kInf;
  double da_best = 1.0, db_best = 0.0;  // increment parameters

  const auto eval = [&](double a, double b) {
    return warp_score(f, compose(base, AffineWarp(a, b)), tmpl, w, kind);
  };

  const auto consider = [&](double a, double b, double s) {
    if (s < res.score) {
      res.score = s;
      da_best = a;
      db_best = b;
    }
  };

  // 21x21 candidate grid; t = 0 hits the identity exactly.
  const std::size_t na = bounds.eps_a > 0.0 ? 21 : 1;
  const std::size_t nb = bounds.eps_b > 0.0 ? 21 : 1;
  for (std::size_t ia = 0; ia < na; ++ia) {
    const double ta = na == 1 ? 0.0 : (static_cast<double>(ia) - 10.0) / 10.0;
    const double a = 1.0 + ta * bounds.eps_a;
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const double tb = nb == 1 ? 0.0 : (static_cast<double>(ib) - 10.0) / 10.0;
      const double b = tb * bounds.eps_b;
      const double s = eval(a, b);
      if (a == 1.0 && b == 0.0) res.identity_score = s;
      consider(a, b, s);
    }
  }

  if (std::isinf(res.score)) {
    res.warp = base;
    res.degenerate = true;
    return res;
  }

  // One golden-section pass per coordinate around the grid winner, bracket
  // one grid spacing wide, clipped to the box. Every evaluation feeds
  // `consider`, so refinement can only improve on the grid result.
  constexpr double kGolden = 0.6180339887498949;
  const auto refine = [&](double lo, double hi, auto&& score_at) {
    double c = hi - kGolden * (hi - lo);
    double d = lo + kGolden * (hi - lo);
    double fc = score_at(c);
    double fd = score_at(d);
    for (int it = 0; it < 25; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - kGolden * (hi - lo);
        fc = score_at(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + kGolden * (hi - lo);
        fd = score_at(d);
      }
    }
  };

  if (bounds.eps_a > 0.0) {
    const double da = bounds.eps_a / 10.0;
    const double lo = std::max(1.0 - bounds.eps_a, da_best - da);
    const double hi = std::min(1.0 + bounds.eps_a, da_best + da);
    const double b = db_best;
    refine(lo, hi, [&](double a) {
      const double s = eval(a, b);
      consider(a, b, s);
      return s;
    });
  }
  if (bounds.eps_b > 0.0) {
    const double db = bounds.eps_b / 10.0;
    const double lo = std::max(-bounds.eps_b, db_best - db);
    const double hi = std::min(bounds.eps_b, db_best + db);
    const double a = da_best;
    refine(lo, hi, [&](double b) {
      const double s = eval(a, b);
      consider(a, b, s);
      return s;
    });
  }
  res.warp = compose(base, AffineWarp(da_best, db_best));
  return res;
}

std::vector<AffineWarp> cluster_mean_warps(const std::vector<AffineWarp>& warps,
                                           const Partition& partition) {
  if (warps.size() != partition.labels.size())
    throw InvalidArgument("cluster_mean_warps: warp count != partition length");
  std::vector<double> mean_a(partition.k, 0.0);
  std::vector<double> mean_b(partition.k, 0.0);
  const std::vector<std::size_t> sizes = partition.sizes();
  for (std::size_t i = 0; i < warps.size(); ++i) {
    mean_a[partition.labels[i]] += warps[i].a;
    mean_b[partition.labels[i]] += warps[i].b;
  }
  std::vector<AffineWarp> means(partition.k);
  for (std::size_t k = 0; k < partition.k; ++k) {
    if (sizes[k] == 0) continue;
    means[k] = AffineWarp(mean_a[k] / static_cast<double>(sizes[k]),
                          mean_b[k] / static_cast<double>(sizes[k]));
  }
  return means;
}

std::vector<AffineWarp> normalize_warps(const std::vector<AffineWarp>& warps,
                                        const Partition& partition) {
  const std::vector<AffineWarp> means = cluster_mean_warps(warps, partition);
  std::vector<AffineWarp> inv(partition.k);
  for (std::size_t k = 0; k < partition.k; ++k) inv[k] = invert(means[k]);
  std::vector<AffineWarp> out(warps.size());
  for (std::size_t i = 0; i < warps.size(); ++i)
    out[i] = compose(warps[i], inv[partition.labels[i]]);
  return out;
}

AssignResult assign_clusters(const std::vector<SampledCurve>& curves,
                             const std::vector<Template>& templates,
                             const WeightFunction& w, MetricKind kind,
                             const Partition& current) {
  const std::size_t n = curves.size();
  const std::size_t k = templates.size();
  if (current.labels.size() != n || current.k != k)
    throw InvalidArgument("assign_clusters: partition does not match inputs");

  std::vector<std::vector<double>> scores(n, std::vector<double>(k));
  AssignResult res;
  res.partition = current;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c)
      scores[i][c] = warp_score(curves[i], AffineWarp::identity(), templates[c], w,
                                kind);
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (scores[i][c] < scores[i][best]) best = c;
    const std::size_t cur = current.labels[i];
    // a tie with the current cluster keeps it; other ties go to the lowest
    // cluster index via the strict comparison above
    std::size_t chosen = best;
    if (scores[i][cur] == scores[i][best]) chosen = cur;
    if (std::isinf(scores[i][best])) chosen = cur;
    res.partition.labels[i] = chosen;
  }

  // per-step improvement bookkeeping
  for (std::size_t i = 0; i < n; ++i) {
    const double so = scores[i][current.labels[i]];
    const double sn = scores[i][res.partition.labels[i]];
    if (std::isfinite(so) && std::isfinite(sn)) {
      res.old_score_sum += so;
      res.new_score_sum += sn;
    }
    if (sn > so) ++res.violations;
    if (res.partition.labels[i] != current.labels[i]) ++res.changed;
  }

  // empty-cluster repair: steal the worst-fitting curve from the largest
  // cluster
  std::vector<std::size_t> sizes = res.partition.sizes();
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (sizes[empty] > 0) continue;
    std::size_t donor = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (sizes[c] > sizes[donor]) donor = c;
    if (sizes[donor] < 2) continue;  // nothing to steal without emptying donor
    std::size_t worst = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (res.partition.labels[i] != donor) continue;
      if (worst == n || scores[i][donor] > scores[worst][donor]) worst = i;
    }
    res.partition.labels[worst] = empty;
    --sizes[donor];
    ++sizes[empty];
    ++res.repaired;
  }
  return res;
}

}  // namespace skma
