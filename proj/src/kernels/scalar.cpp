#include <cmath>

#include "folia/kernels.hpp"

namespace folia::kernels {

SideMasks side_mask_scalar(double x, double y, const double* A,
                           const double* B, const double* C, int n) {
  SideMasks m;
  const double r2 = x * x + y * y;
  for (int k = 0; k < n; ++k) {
    const double s = (A[k] * r2 + B[k] * x) + C[k];
    if (s < 0) m.negative |= 1u << k;
    if (s == 0) m.zero |= 1u << k;
  }
  return m;
}

double l1_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

double candel_row_scalar(double x, double y, double gx, double gy,
                         const double* bx, const double* by, std::size_t n) {
  const double one_m_r2 = 1.0 - x * x - y * y;
  const double c0 = -2.0 * (x * gx + y * gy) / one_m_r2;
  double acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = x - bx[j], dy = y - by[j];
    const double inv = 1.0 / (dx * dx + dy * dy);
    acc += (c0 - 2.0 * (dx * gx + dy * gy) * inv) * inv;
  }
  return one_m_r2 * acc;
}

}  // namespace folia::kernels
