#pragma once

#include <vector>

#include "skma/curve.hpp"
#include "skma/metrics.hpp"
#include "skma/partition.hpp"

namespace skma {

// Point-wise clustering criterion g on the common grid: between-cluster
// sum-of-squares in the L2 mode, within-cluster similarity in the H1 mode.
struct CriterionProfile {
  UniformGrid grid;
  std::vector<double> values;
  MetricKind kind;
};

struct PairDiagnostics {
  std::size_t empty_overlap_pairs = 0;
};

// Exact O(n^2 * grid) between-cluster sum-of-squares:
//   g(x) = (1/n) sum_ij G_ij(x) - sum_k (1/n_k) sum_{i,j in C_k} G_ij(x)
// with G_ij(x) = (f_i(x)-f_j(x))^2 * 1_overlap(x) / sqrt(mu(overlap_ij)).
// Pairs with empty overlap contribute zero and are counted in `diag`.
// Multidimensional curves sum squared differences over dimensions.
CriterionProfile bcss_pairwise(const std::vector<SampledCurve>& curves,
                               const Partition& partition,
                               PairDiagnostics* diag = nullptr);

// O(n * grid) centroid decomposition of the same quantity; valid only when
// every curve carries the same missing mask. Throws InvalidArgument when
// domains differ — callers fall back to bcss_pairwise.
CriterionProfile bcss_centroid_fast(const std::vector<SampledCurve>& curves,
                                    const Partition& partition);

// Within-cluster similarity criterion:
//   g(x) = sum_k (1/n_k) sum_{i,j in C_k} u_i(x) u_j(x) * 1_overlap(x),
// u_i = f_i' / |f_i|_H1 per dimension, averaged over dimensions.
CriterionProfile wcsim_pointwise(const std::vector<SampledCurve>& curves,
                                 const Partition& partition);

// Same criterion from precomputed normalized-derivative profiles.
CriterionProfile wcsim_from_profiles(const std::vector<SampledCurve>& uprofiles,
                                     const Partition& partition);

}  // namespace skma
