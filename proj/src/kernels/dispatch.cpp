#include <cstdlib>
#include <cstring>

#include "folia/kernels.hpp"

namespace folia::kernels {
namespace {

enum class Backend { scalar, avx2 };

Backend pick_backend() {
  const char* env = std::getenv("FOLIA_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
#if defined(FOLIA_HAVE_AVX2)
  if (env && std::strcmp(env, "avx2") == 0) return Backend::avx2;
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
  return Backend::scalar;
}

const Backend g_backend = pick_backend();

}  // namespace

SideMaskFn side_mask_fn() {
#if defined(FOLIA_HAVE_AVX2)
  if (g_backend == Backend::avx2) return &side_mask_avx2;
#endif
  return &side_mask_scalar;
}

L1Fn l1_fn() {
#if defined(FOLIA_HAVE_AVX2)
  if (g_backend == Backend::avx2) return &l1_avx2;
#endif
  return &l1_scalar;
}

CandelRowFn candel_row_fn() {
#if defined(FOLIA_HAVE_AVX2)
  if (g_backend == Backend::avx2) return &candel_row_avx2;
#endif
  return &candel_row_scalar;
}

const char* active_backend() {
  return g_backend == Backend::scalar ? "scalar" : "avx2";
}

}  // namespace folia::kernels
