#include "skma/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "skma/error.hpp"

namespace skma {

RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  if (n1 == 0 || n2 == 0)
    throw InvalidArgument("rank_sum_test: both samples must be non-empty");
  const std::size_t n = n1 + n2;

  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });

  // Midranks and the tie-correction sum of t^3 - t over tie groups.
  std::vector<double> rank(n);
  double tie_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t r = i; r <= j; ++r) rank[order[r]] = mid;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }

  double r1 = 0.0;
  for (std::size_t k = 0; k < n1; ++k) r1 += rank[k];

  RankSumResult res;
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(n);
  res.u1 = r1 - dn1 * (dn1 + 1.0) / 2.0;

  const double mu = dn1 * dn2 / 2.0;
  double tie_term = 0.0;
  if (n > 1) tie_term = tie_sum / (dn * (dn - 1.0));
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term);
  if (!(var > 0.0)) {
    // every pooled value identical: no evidence of a shift
    res.z = 0.0;
    res.p_value = 1.0;
    return res;
  }
  const double sigma = std::sqrt(var);
  const double centered = res.u1 - mu;
  const double cc = (centered > 0.0) ? 0.5 : (centered < 0.0 ? -0.5 : 0.0);
  res.z = (centered - cc) / sigma;
  res.p_value = std::min(1.0, std::erfc(std::fabs(res.z) / std::sqrt(2.0)));
  return res;
}

}  // namespace skma
