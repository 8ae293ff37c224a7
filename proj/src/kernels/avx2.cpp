#include "folia/kernels.hpp"

#if defined(FOLIA_HAVE_AVX2)
#include <immintrin.h>

namespace folia::kernels {

// No FMA here: must match the scalar evaluation (A*r2 + B*x) + C bit-for-bit.
SideMasks side_mask_avx2(double x, double y, const double* A, const double* B,
                         const double* C, int n) {
  SideMasks m;
  const double r2 = x * x + y * y;
  const __m256d vr2 = _mm256_set1_pd(r2), vx = _mm256_set1_pd(x);
  const __m256d zero = _mm256_setzero_pd();
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(A + k), vr2);
    const __m256d t2 = _mm256_mul_pd(_mm256_loadu_pd(B + k), vx);
    const __m256d s =
        _mm256_add_pd(_mm256_add_pd(t1, t2), _mm256_loadu_pd(C + k));
    const int neg = _mm256_movemask_pd(_mm256_cmp_pd(s, zero, _CMP_LT_OQ));
    const int zer = _mm256_movemask_pd(_mm256_cmp_pd(s, zero, _CMP_EQ_OQ));
    m.negative |= std::uint32_t(neg) << k;
    m.zero |= std::uint32_t(zer) << k;
  }
  for (; k < n; ++k) {
    const double s = (A[k] * r2 + B[k] * x) + C[k];
    if (s < 0) m.negative |= 1u << k;
    if (s == 0) m.zero |= 1u << k;
  }
  return m;
}

double l1_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double out = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) out += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return out;
}

double candel_row_avx2(double x, double y, double gx, double gy,
                       const double* bx, const double* by, std::size_t n) {
  const double one_m_r2 = 1.0 - x * x - y * y;
  const double c0 = -2.0 * (x * gx + y * gy) / one_m_r2;
  const __m256d vx = _mm256_set1_pd(x), vy = _mm256_set1_pd(y);
  const __m256d vgx = _mm256_set1_pd(gx), vgy = _mm256_set1_pd(gy);
  const __m256d vc0 = _mm256_set1_pd(c0), vm2 = _mm256_set1_pd(-2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(vx, _mm256_loadu_pd(bx + j));
    const __m256d dy = _mm256_sub_pd(vy, _mm256_loadu_pd(by + j));
    const __m256d rho2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    const __m256d inv = _mm256_div_pd(one, rho2);
    const __m256d dot = _mm256_fmadd_pd(dx, vgx, _mm256_mul_pd(dy, vgy));
    const __m256d t = _mm256_fmadd_pd(_mm256_mul_pd(vm2, dot), inv, vc0);
    acc = _mm256_fmadd_pd(t, inv, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double out = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) {
    const double dx = x - bx[j], dy = y - by[j];
    const double inv = 1.0 / (dx * dx + dy * dy);
    out += (c0 - 2.0 * (dx * gx + dy * gy) * inv) * inv;
  }
  return one_m_r2 * out;
}

}  // namespace folia::kernels
#endif
