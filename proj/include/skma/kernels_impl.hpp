#pragma once

#include "skma/kernels.hpp"

// Per-ISA entry points behind the dispatch table in kernels.cpp.

namespace skma::kernels {

namespace scalar {
SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n);
SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n);
SumCount dot_sum(const double* f1, const double* f2, std::size_t n);
SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n);
SumCount sum_finite(const double* v, std::size_t n);
void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n);
std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n);
void axpy(double* acc, const double* src, double scale, std::size_t n);
void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp);
}  // namespace scalar

#if defined(SKMA_HAVE_AVX2)
namespace avx2 {
SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n);
SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n);
SumCount dot_sum(const double* f1, const double* f2, std::size_t n);
SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n);
SumCount sum_finite(const double* v, std::size_t n);
void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n);
std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n);
void axpy(double* acc, const double* src, double scale, std::size_t n);
void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp);
}  // namespace avx2
#endif

}  // namespace skma::kernels
