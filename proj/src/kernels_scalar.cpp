#include <cmath>

#include "skma/kernels.hpp"
#include "skma/kernels_impl.hpp"

namespace skma::kernels::scalar {

SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n) {
  SumCount r;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    r.sum += d * d;
    ++r.count;
  }
  return r;
}

SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n) {
  SumCount r;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    r.sum += w[i] * (d * d);
    ++r.count;
  }
  return r;
}

SumCount dot_sum(const double* f1, const double* f2, std::size_t n) {
  SumCount r;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = f1[i] * f2[i];
    if (std::isnan(p)) continue;
    r.sum += p;
    ++r.count;
  }
  return r;
}

SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n) {
  SumCount r;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = f1[i] * f2[i];
    if (std::isnan(p)) continue;
    r.sum += w[i] * p;
    ++r.count;
  }
  return r;
}

SumCount sum_finite(const double* v, std::size_t n) {
  SumCount r;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    r.sum += v[i];
    ++r.count;
  }
  return r;
}

void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    acc[i] += v[i];
    cnt[i] += 1.0;
  }
}

std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n) {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    dst[i] += d * d;
    ++count;
  }
  return count;
}

void axpy(double* acc, const double* src, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += scale * src[i];
}

void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp) {
  for (std::size_t j = 0; j < n; ++j) {
    const double p = p0 + static_cast<double>(j) * dp;
    out[j] = detail::lerp_element(src, src_n, p);
  }
}

}  // namespace skma::kernels::scalar
