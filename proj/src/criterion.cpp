#include "skma/criterion.hpp"

#include <cmath>

#include "skma/kernels.hpp"

namespace skma {

namespace {

void require_instance(const std::vector<SampledCurve>& curves,
                      const Partition& partition) {
  if (curves.empty()) throw InvalidArgument("criterion: empty curve set");
  if (partition.labels.size() != curves.size())
    throw InvalidArgument("criterion: partition length != curve count");
  if (partition.k < 2)
    throw InvalidArgument(
        "criterion: K must be >= 2; the weight function is undefined for a "
        "single cluster");
  if (partition.has_empty_cluster())
    throw InvalidArgument("criterion: empty cluster");
  const UniformGrid& g = curves.front().grid();
  for (const SampledCurve& c : curves) {
    if (!(c.grid() == g))
      throw InvalidArgument("criterion: curves must share the common grid");
    if (c.dims() != curves.front().dims())
      throw InvalidArgument("criterion: curves must share the codomain dimension");
  }
}

}  // namespace

CriterionProfile bcss_pairwise(const std::vector<SampledCurve>& curves,
                               const Partition& partition, PairDiagnostics* diag) {
  require_instance(curves, partition);
  const std::size_t n = curves.size();
  const UniformGrid grid = curves.front().grid();
  const std::vector<std::size_t> sizes = partition.sizes();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> total(grid.count, 0.0);
  std::vector<double> within(grid.count, 0.0);
  std::vector<double> scratch(grid.count);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::fill(scratch.begin(), scratch.end(), 0.0);
      std::int64_t cnt = 0;
      for (std::size_t d = 0; d < curves[i].dims(); ++d)
        cnt = kernels::sq_diff_mask_add(scratch.data(), curves[i].dim(d).data(),
                                        curves[j].dim(d).data(), grid.count);
      if (cnt == 0) {
        if (diag != nullptr) ++diag->empty_overlap_pairs;
        continue;
      }
      // Each unordered pair appears twice in the ordered double sums.
      const double c = 2.0 / std::sqrt(static_cast<double>(cnt) * grid.step);
      kernels::axpy(total.data(), scratch.data(), c * inv_n, grid.count);
      if (partition.labels[i] == partition.labels[j])
        kernels::axpy(within.data(), scratch.data(),
                      c / static_cast<double>(sizes[partition.labels[i]]),
                      grid.count);
    }
  }

  std::vector<double> g(grid.count);
  for (std::size_t x = 0; x < grid.count; ++x) g[x] = total[x] - within[x];
  return CriterionProfile{grid, std::move(g), MetricKind::l2_distance};
}

CriterionProfile bcss_centroid_fast(const std::vector<SampledCurve>& curves,
                                    const Partition& partition) {
  require_instance(curves, partition);
  if (!equal_masks(curves))
    throw InvalidArgument("bcss_centroid_fast: curve domains differ, use "
                          "bcss_pairwise");
  const std::size_t n = curves.size();
  const std::size_t dims = curves.front().dims();
  const UniformGrid grid = curves.front().grid();
  const std::size_t valid = curves.front().valid_count();
  const double c = 2.0 / std::sqrt(static_cast<double>(valid) * grid.step);

  std::vector<double> total(grid.count, 0.0);
  std::vector<double> within(grid.count, 0.0);
  std::vector<double> acc(grid.count);
  std::vector<double> cnt(grid.count);
  std::vector<double> mean(grid.count);

  const auto pointwise_mean = [&](const std::vector<std::size_t>& idx,
                                  std::size_t d) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(cnt.begin(), cnt.end(), 0.0);
    for (std::size_t i : idx)
      kernels::accumulate_finite(acc.data(), cnt.data(), curves[i].dim(d).data(),
                                 grid.count);
    for (std::size_t x = 0; x < grid.count; ++x)
      mean[x] = cnt[x] > 0.0 ? acc[x] / cnt[x] : kMissing;
  };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const std::vector<std::vector<std::size_t>> members = partition.members();

  for (std::size_t d = 0; d < dims; ++d) {
    pointwise_mean(all, d);
    for (std::size_t i = 0; i < n; ++i)
      kernels::sq_diff_mask_add(total.data(), curves[i].dim(d).data(), mean.data(),
                                grid.count);
    for (const std::vector<std::size_t>& mem : members) {
      pointwise_mean(mem, d);
      for (std::size_t i : mem)
        kernels::sq_diff_mask_add(within.data(), curves[i].dim(d).data(),
                                  mean.data(), grid.count);
    }
  }

  std::vector<double> g(grid.count);
  for (std::size_t x = 0; x < grid.count; ++x) g[x] = c * (total[x] - within[x]);
  return CriterionProfile{grid, std::move(g), MetricKind::l2_distance};
}

CriterionProfile wcsim_from_profiles(const std::vector<SampledCurve>& uprofiles,
                                     const Partition& partition) {
  require_instance(uprofiles, partition);
  const UniformGrid grid = uprofiles.front().grid();
  const std::size_t dims = uprofiles.front().dims();
  const std::vector<std::vector<std::size_t>> members = partition.members();

  std::vector<double> g(grid.count, 0.0);
  std::vector<double> acc(grid.count);
  std::vector<double> cnt(grid.count);

  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t k = 0; k < partition.k; ++k) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(cnt.begin(), cnt.end(), 0.0);
      for (std::size_t i : members[k])
        kernels::accumulate_finite(acc.data(), cnt.data(),
                                   uprofiles[i].dim(d).data(), grid.count);
      // (sum of u_i over members valid at x)^2 equals the ordered double sum
      // of u_i u_j over pairs jointly valid at x, including i = j.
      const double inv_nk = 1.0 / static_cast<double>(members[k].size());
      for (std::size_t x = 0; x < grid.count; ++x)
        g[x] += inv_nk * acc[x] * acc[x] / static_cast<double>(dims);
    }
  }
  return CriterionProfile{grid, std::move(g), MetricKind::h1_similarity};
}

CriterionProfile wcsim_pointwise(const std::vector<SampledCurve>& curves,
                                 const Partition& partition) {
  std::vector<SampledCurve> uprofiles;
  uprofiles.reserve(curves.size());
  for (const SampledCurve& c : curves) uprofiles.push_back(normalized_derivative(c));
  return wcsim_from_profiles(uprofiles, partition);
}

}  // namespace skma
