#include "skma/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "skma/error.hpp"
#include "skma/kernels_impl.hpp"

namespace skma::kernels {

namespace {

struct Vtable {
  SumCount (*sq_diff_sum)(const double*, const double*, std::size_t);
  SumCount (*weighted_sq_diff_sum)(const double*, const double*, const double*,
                                   std::size_t);
  SumCount (*dot_sum)(const double*, const double*, std::size_t);
  SumCount (*weighted_dot_sum)(const double*, const double*, const double*,
                               std::size_t);
  SumCount (*sum_finite)(const double*, std::size_t);
  void (*accumulate_finite)(double*, double*, const double*, std::size_t);
  std::int64_t (*sq_diff_mask_add)(double*, const double*, const double*,
                                   std::size_t);
  void (*axpy)(double*, const double*, double, std::size_t);
  void (*warp_lerp)(double*, std::size_t, const double*, std::size_t, double,
                    double);
};

constexpr Vtable kScalar = {
    scalar::sq_diff_sum,  scalar::weighted_sq_diff_sum, scalar::dot_sum,
    scalar::weighted_dot_sum, scalar::sum_finite,       scalar::accumulate_finite,
    scalar::sq_diff_mask_add, scalar::axpy,             scalar::warp_lerp,
};

#if defined(SKMA_HAVE_AVX2)
constexpr Vtable kAvx2 = {
    avx2::sq_diff_sum,  avx2::weighted_sq_diff_sum, avx2::dot_sum,
    avx2::weighted_dot_sum, avx2::sum_finite,       avx2::accumulate_finite,
    avx2::sq_diff_mask_add, avx2::axpy,             avx2::warp_lerp,
};
#endif

std::atomic<const Vtable*> g_active{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

Isa env_choice() {
  const char* env = std::getenv("SKMA_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported())
        throw InvalidArgument("SKMA_KERNELS=avx2 but the CPU lacks AVX2/FMA");
      return Isa::avx2;
    }
    // anything else, including "auto", falls through to detection
  }
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

const Vtable* table_for(Isa isa) {
#if defined(SKMA_HAVE_AVX2)
  if (isa == Isa::avx2) return &kAvx2;
#endif
  return &kScalar;
}

const Vtable& active() {
  const Vtable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const Isa isa = env_choice();
    g_isa.store(isa, std::memory_order_relaxed);
    t = table_for(isa);
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

bool avx2_supported() {
#if defined(SKMA_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  active();
  return g_isa.load(std::memory_order_relaxed);
}

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported())
    throw InvalidArgument("AVX2 kernels unavailable on this CPU/build");
  g_isa.store(isa, std::memory_order_relaxed);
  g_active.store(table_for(isa), std::memory_order_release);
}

SumCount sq_diff_sum(const double* f1, const double* f2, std::size_t n) {
  return active().sq_diff_sum(f1, f2, n);
}

SumCount weighted_sq_diff_sum(const double* f1, const double* f2, const double* w,
                              std::size_t n) {
  return active().weighted_sq_diff_sum(f1, f2, w, n);
}

SumCount dot_sum(const double* f1, const double* f2, std::size_t n) {
  return active().dot_sum(f1, f2, n);
}

SumCount weighted_dot_sum(const double* f1, const double* f2, const double* w,
                          std::size_t n) {
  return active().weighted_dot_sum(f1, f2, w, n);
}

SumCount sum_finite(const double* v, std::size_t n) {
  return active().sum_finite(v, n);
}

void accumulate_finite(double* acc, double* cnt, const double* v, std::size_t n) {
  active().accumulate_finite(acc, cnt, v, n);
}

std::int64_t sq_diff_mask_add(double* dst, const double* f1, const double* f2,
                              std::size_t n) {
  return active().sq_diff_mask_add(dst, f1, f2, n);
}

void axpy(double* acc, const double* src, double scale, std::size_t n) {
  active().axpy(acc, src, scale, n);
}

void warp_lerp(double* out, std::size_t n, const double* src, std::size_t src_n,
               double p0, double dp) {
  active().warp_lerp(out, n, src, src_n, p0, dp);
}

}  // namespace skma::kernels
