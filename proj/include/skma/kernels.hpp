#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

// Grid-sized inner loops of the library: masked reductions and affine
// resampling over contiguous double arrays. Missing samples are quiet NaN;
// every kernel treats NaN as "point absent". This is load-bearing — the
// translation units implementing these kernels must not be compiled with
// -ffast-math or anything else that assumes NaN-free data.
//
// Each kernel has a scalar reference implementation and may have an AVX2
// variant; the active variant is selected at runtime (see set_isa). The two
// variants are equivalence-tested: elementwise kernels agree bit-exactly,
// reductions agree up to accumulation-order rounding.

namespace skma::kernels {

enum class Isa { scalar, avx2 };

// True when the running CPU can execute the AVX2 variants.
bool avx2_supported();

// Selected at first use: AVX2 when supported, unless the SKMA_KERNELS
// environment variable ("scalar", "avx2", "auto") says otherwise.
Isa active_isa();

// Throws InvalidArgument when the requested ISA is unsupported here.
void set_isa(Isa isa);

struct SumCount {
  double sum = 0.0;
  std::int64_t count = 0;
};

// sum of (f1[i]-f2[i])^2 over i where both are finite; count of such i.
SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n);

// sum of w[i]*(f1[i]-f2[i])^2 over i where f1, f2 both finite. w must be
// finite everywhere.
SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n);

// sum of f1[i]*f2[i] over i where both finite.
SumCount dot_sum(const double* f1, const double* f2, std::size_t n);

// sum of w[i]*f1[i]*f2[i] over i where f1, f2 both finite.
SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n);

// sum of v[i] over finite entries; count of finite entries.
SumCount sum_finite(const double* v, std::size_t n);

// acc[i] += v[i] and cnt[i] += 1 where v[i] is finite.
void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n);

// dst[i] += (f1[i]-f2[i])^2 where both finite; returns the count of such i.
std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n);

// acc[i] += scale * src[i] for all i (no masking; src is expected NaN-free).
void axpy(double* acc, const double* src, double scale, std::size_t n);

// Affine resample: for j in [0, n), the source position is p = p0 + j*dp
// (fractional index into src). out[j] = linear interpolation of src at p,
// NaN when p lies outside [0, src_n-1] or a bracketing sample is missing.
// Positions within 1e-9 of an integer snap to it and return that sample
// exactly, so an identity resample is sample-exact.
void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp);

namespace detail {

inline constexpr double kSnapTol = 1e-9;

// Shared scalar element of warp_lerp; the AVX2 tail loop uses it too.
inline double lerp_element(const double* src, std::size_t src_n, double p) {
  const double r = std::nearbyint(p);
  if (std::fabs(p - r) < kSnapTol) {
    if (r < 0.0 || r > static_cast<double>(src_n - 1)) return std::nan("");
    return src[static_cast<std::size_t>(r)];
  }
  if (p < 0.0 || p > static_cast<double>(src_n - 1)) return std::nan("");
  std::size_t i = static_cast<std::size_t>(p);
  if (i > src_n - 2) i = src_n - 2;
  const double t = p - static_cast<double>(i);
  const double v0 = src[i];
  const double v1 = src[i + 1];
  return v0 + t * (v1 - v0);
}

}  // namespace detail

}  // namespace skma::kernels
