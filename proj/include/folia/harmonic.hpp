#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "folia/cocycle.hpp"

namespace folia {

// One leafwise Brownian path with its fiber holonomy, mirroring SkewState.
struct BrownianState {
  cplx position{0.0, 1.0};
  SpherePoint fiber;
  double log_deriv = 0;
  double time = 0;
};

// Pathwise step driven by standardized noises (xi1, xi2): the exact
// multiplicative map x += sqrt(2)*y*sqrt(dt)*xi1, y *= exp(sqrt(2)*sqrt(dt)*xi2).
// Zero injected noise leaves the position exactly fixed. Domain exits reduce
// through the side pairing and fold holonomy into (fiber, log_deriv).
BrownianState brownian_advance_noise(const FuchsianGroup& G,
                                     const Representation& rep, BrownianState s,
                                     double dt, double xi1, double xi2);

// Sampling step for the generator y^2 * (d_xx + d_yy): the Ito compensator of
// the multiplicative y-noise enters as a deterministic shift of the injected
// variate, making the y-marginal update the exact log-normal solution.
BrownianState brownian_advance(const FuchsianGroup& G, const Representation& rep,
                               const BrownianState& s, double dt, Rng& rng);

// Mean of log_deriv / T over N Brownian paths from Liouville starts.
ExponentEstimate brownian_lyapunov(const FuchsianGroup& G, const Representation& rep,
                                   std::uint64_t seed, double T, double dt, int N,
                                   int workers = 0);

// Normalized 32x32 position-occupation histogram of a Brownian ensemble over
// the domain bounding box (comparable with EmpiricalMeasure::base32).
std::vector<double> brownian_base_occupation(const FuchsianGroup& G,
                                             const Representation& rep,
                                             std::uint64_t seed, double T, double dt,
                                             int N, int workers = 0);

// k(x, xi) = (1 - |x|^2) / |x - e^{i xi}|^2 on the unit disk.
double poisson_kernel(cplx x, double xi);

struct DiskField {
  int n = 0;        // n x n cell-centered nodes over [-1,1]^2, row-major
  double margin = 0.02;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 where x^2 + y^2 < (1 - margin)^2
  double at(int ix, int iy) const { return values[std::size_t(iy) * n + ix]; }
  double node(int i) const { return -1.0 + (i + 0.5) * (2.0 / n); }
};

template <typename F>
DiskField make_disk_field(int n, double margin, F&& f) {
  if (n < 64) throw std::invalid_argument("make_disk_field: grid must be >= 64");
  DiskField d;
  d.n = n;
  d.margin = margin;
  d.values.assign(std::size_t(n) * n, 0.0);
  d.mask.assign(std::size_t(n) * n, 0);
  const double r2max = (1.0 - margin) * (1.0 - margin);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double x = d.node(ix), y = d.node(iy);
      if (x * x + y * y < r2max) {
        d.mask[std::size_t(iy) * n + ix] = 1;
        d.values[std::size_t(iy) * n + ix] = f(x, y);
      }
    }
  }
  return d;
}

// Quadrature check of the boundary-kernel pairing identity
//   int_{S^1} int_D <grad log k(x,xi), grad log u(x)> k(x,xi) dx dm_h(xi)
//     = int_D <grad log h(x), grad log u(x)> h(x) dx
// for h harmonic with boundary measure m_h and log u affine. The left side
// uses the closed-form kernel gradient, the right side central differences on
// the sampled h; both integrate over the same interior nodes, so the mask-edge
// quadrature error cancels and the residual isolates the identity itself.
struct CandelParams {
  enum HKind { uniform, point_mass };
  HKind h_kind = uniform;
  double xi0 = 0;          // boundary angle of the point mass
  double gx = 1, gy = 0;   // grad log u (affine u)
  int grid_n = 256;
  int boundary_nodes = 1024;
  double margin = 0.02;
  int workers = 0;
};

struct CandelReport {
  double lhs = 0, rhs = 0, residual = 0;
  int grid = 0, boundary_nodes = 0;
};

CandelReport candel_identity_residual(const CandelParams& p);

}  // namespace folia
