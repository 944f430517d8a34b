#pragma once

#include <span>

namespace skma {

// Two-sided Mann-Whitney U (rank-sum) test, normal approximation with
// midranks, tie correction and continuity correction.
struct RankSumResult {
  double u1 = 0.0;      // U statistic of the first sample
  double z = 0.0;       // standardized statistic
  double p_value = 1.0; // two-sided
};

RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b);

}  // namespace skma
