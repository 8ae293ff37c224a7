#pragma once
#include <cstddef>
#include <cstdint>

// Small numeric primitives with a scalar reference implementation and an
// AVX2 variant selected at runtime (override with FOLIA_KERNELS=scalar|avx2).
// side_mask must be bit-exact across backends (it steers trajectory
// reduction); l1 and candel_row are reductions where the vector variant may
// reassociate, so they are equivalence-tested to tight tolerances instead.
namespace folia::kernels {

struct SideMasks {
  std::uint32_t negative = 0;  // bit k set iff s_k < 0
  std::uint32_t zero = 0;      // bit k set iff s_k == 0
};

// s_k = A_k*(x^2+y^2) + B_k*x + C_k, evaluated as (A*r2 + B*x) + C.
using SideMaskFn = SideMasks (*)(double x, double y, const double* A,
                                 const double* B, const double* C, int n);

using L1Fn = double (*)(const double* a, const double* b, std::size_t n);

// Boundary-kernel row sum for the disk-quadrature identity check:
//   sum_j [c0 - 2*((x-bx_j)*gx + (y-by_j)*gy) / rho_j^2] / rho_j^2
// scaled by (1 - x^2 - y^2), where rho_j^2 = (x-bx_j)^2 + (y-by_j)^2 and
// c0 = -2*(x*gx + y*gy)/(1 - x^2 - y^2).
using CandelRowFn = double (*)(double x, double y, double gx, double gy,
                               const double* bx, const double* by,
                               std::size_t n);

SideMasks side_mask_scalar(double x, double y, const double* A,
                           const double* B, const double* C, int n);
double l1_scalar(const double* a, const double* b, std::size_t n);
double candel_row_scalar(double x, double y, double gx, double gy,
                         const double* bx, const double* by, std::size_t n);

#if defined(FOLIA_HAVE_AVX2)
SideMasks side_mask_avx2(double x, double y, const double* A, const double* B,
                         const double* C, int n);
double l1_avx2(const double* a, const double* b, std::size_t n);
double candel_row_avx2(double x, double y, double gx, double gy,
                       const double* bx, const double* by, std::size_t n);
#endif

SideMaskFn side_mask_fn();
L1Fn l1_fn();
CandelRowFn candel_row_fn();
const char* active_backend();

}  // namespace folia::kernels
