// AVX2 variants of the grid kernels. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime cpuid check (see
// kernels.cpp). Lane layout: 4 doubles per step, scalar tail.
//
// Elementwise kernels (accumulate_finite, sq_diff_mask_add, axpy, warp_lerp)
// reproduce the scalar results bit-exactly; reductions differ only by
// accumulation order.

#if defined(SKMA_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

#include "skma/kernels.hpp"
#include "skma/kernels_impl.hpp"

namespace skma::kernels::avx2 {

namespace {

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

inline double hsum(__m256d v) {
  double lanes[4];
  _mm256_storeu_pd(lanes, v);
  return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

inline int mask_count(__m256d mask) {
  return __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(mask)));
}

}  // namespace

SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(f1 + i);
    const __m256d b = _mm256_loadu_pd(f2 + i);
    const __m256d mask = _mm256_cmp_pd(a, b, _CMP_ORD_Q);
    const __m256d d = _mm256_and_pd(_mm256_sub_pd(a, b), mask);
    acc = _mm256_fmadd_pd(d, d, acc);
    count += mask_count(mask);
  }
  SumCount r{hsum(acc), count};
  for (; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    r.sum += d * d;
    ++r.count;
  }
  return r;
}

SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(f1 + i);
    const __m256d b = _mm256_loadu_pd(f2 + i);
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d mask = _mm256_cmp_pd(a, b, _CMP_ORD_Q);
    const __m256d d = _mm256_and_pd(_mm256_sub_pd(a, b), mask);
    acc = _mm256_fmadd_pd(wv, _mm256_mul_pd(d, d), acc);
    count += mask_count(mask);
  }
  SumCount r{hsum(acc), count};
  for (; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    r.sum += w[i] * (d * d);
    ++r.count;
  }
  return r;
}

SumCount dot_sum(const double* f1, const double* f2, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(f1 + i);
    const __m256d b = _mm256_loadu_pd(f2 + i);
    const __m256d mask = _mm256_cmp_pd(a, b, _CMP_ORD_Q);
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_mul_pd(a, b), mask));
    count += mask_count(mask);
  }
  SumCount r{hsum(acc), count};
  for (; i < n; ++i) {
    const double p = f1[i] * f2[i];
    if (std::isnan(p)) continue;
    r.sum += p;
    ++r.count;
  }
  return r;
}

SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(f1 + i);
    const __m256d b = _mm256_loadu_pd(f2 + i);
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d mask = _mm256_cmp_pd(a, b, _CMP_ORD_Q);
    const __m256d p = _mm256_and_pd(_mm256_mul_pd(a, b), mask);
    acc = _mm256_fmadd_pd(wv, p, acc);
    count += mask_count(mask);
  }
  SumCount r{hsum(acc), count};
  for (; i < n; ++i) {
    const double p = f1[i] * f2[i];
    if (std::isnan(p)) continue;
    r.sum += w[i] * p;
    ++r.count;
  }
  return r;
}

SumCount sum_finite(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(v + i);
    const __m256d mask = _mm256_cmp_pd(a, a, _CMP_ORD_Q);
    acc = _mm256_add_pd(acc, _mm256_and_pd(a, mask));
    count += mask_count(mask);
  }
  SumCount r{hsum(acc), count};
  for (; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    r.sum += v[i];
    ++r.count;
  }
  return r;
}

void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n) {
  const __m256d ones = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(v + i);
    const __m256d mask = _mm256_cmp_pd(a, a, _CMP_ORD_Q);
    const __m256d acc_v = _mm256_loadu_pd(acc + i);
    const __m256d cnt_v = _mm256_loadu_pd(cnt + i);
    _mm256_storeu_pd(acc + i,
                     _mm256_blendv_pd(acc_v, _mm256_add_pd(acc_v, a), mask));
    _mm256_storeu_pd(cnt + i,
                     _mm256_blendv_pd(cnt_v, _mm256_add_pd(cnt_v, ones), mask));
  }
  for (; i < n; ++i) {
    if (std::isnan(v[i])) continue;
    acc[i] += v[i];
    cnt[i] += 1.0;
  }
}

std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n) {
  std::int64_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(f1 + i);
    const __m256d b = _mm256_loadu_pd(f2 + i);
    const __m256d mask = _mm256_cmp_pd(a, b, _CMP_ORD_Q);
    const __m256d d = _mm256_sub_pd(a, b);
    const __m256d dst_v = _mm256_loadu_pd(dst + i);
    const __m256d added = _mm256_add_pd(dst_v, _mm256_mul_pd(d, d));
    _mm256_storeu_pd(dst + i, _mm256_blendv_pd(dst_v, added, mask));
    count += mask_count(mask);
  }
  for (; i < n; ++i) {
    const double d = f1[i] - f2[i];
    if (std::isnan(d)) continue;
    dst[i] += d * d;
    ++count;
  }
  return count;
}

void axpy(double* acc, const double* src, double scale, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(acc + i);
    const __m256d v = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a, _mm256_mul_pd(s, v)));
  }
  for (; i < n; ++i) acc[i] += scale * src[i];
}

void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp) {
  const __m256d vp0 = _mm256_set1_pd(p0);
  const __m256d vdp = _mm256_set1_pd(dp);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d vzero = _mm256_setzero_pd();
  const __m256d vmax = _mm256_set1_pd(static_cast<double>(src_n - 1));
  const __m256d vtol = _mm256_set1_pd(detail::kSnapTol);
  const __m256d vnan = _mm256_set1_pd(std::nan(""));
  const __m128i izero = _mm_setzero_si128();
  const __m128i ilast = _mm_set1_epi32(static_cast<int>(src_n - 1));
  const __m128i ipen = _mm_set1_epi32(static_cast<int>(src_n - 2));
  const __m128i ione = _mm_set1_epi32(1);

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d idx = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(j)), lane);
    const __m256d p = _mm256_add_pd(vp0, _mm256_mul_pd(idx, vdp));
    const __m256d r =
        _mm256_round_pd(p, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d snap = _mm256_cmp_pd(abs_pd(_mm256_sub_pd(p, r)), vtol, _CMP_LT_OQ);
    const __m256d ps = _mm256_blendv_pd(p, r, snap);
    const __m256d in_range = _mm256_and_pd(_mm256_cmp_pd(ps, vzero, _CMP_GE_OQ),
                                           _mm256_cmp_pd(ps, vmax, _CMP_LE_OQ));

    // Lerp path. Indices are clamped so out-of-range lanes still gather
    // valid memory; their values are discarded by the in_range blend.
    __m128i i0 = _mm256_cvtpd_epi32(_mm256_floor_pd(ps));
    i0 = _mm_min_epi32(_mm_max_epi32(i0, izero), ipen);
    const __m128i i1 = _mm_add_epi32(i0, ione);
    const __m256d v0 = _mm256_i32gather_pd(src, i0, 8);
    const __m256d v1 = _mm256_i32gather_pd(src, i1, 8);
    const __m256d t = _mm256_sub_pd(ps, _mm256_cvtepi32_pd(i0));
    const __m256d lerped =
        _mm256_add_pd(v0, _mm256_mul_pd(t, _mm256_sub_pd(v1, v0)));

    // Snapped lanes take the node sample directly, so a missing neighbour
    // cannot poison an exact hit.
    __m128i ir = _mm256_cvtpd_epi32(r);
    ir = _mm_min_epi32(_mm_max_epi32(ir, izero), ilast);
    const __m256d node = _mm256_i32gather_pd(src, ir, 8);

    __m256d res = _mm256_blendv_pd(lerped, node, snap);
    res = _mm256_blendv_pd(vnan, res, in_range);
    _mm256_storeu_pd(out + j, res);
  }
  for (; j < n; ++j)
    out[j] = detail::lerp_element(src, src_n, p0 + static_cast<double>(j) * dp);
}

}  // namespace skma::kernels::avx2

#endif  // SKMA_HAVE_AVX2
