#pragma once
#include <cstdint>
#include <vector>

#include "folia/surface_group.hpp"

namespace folia {

// Conformal factor e^{2 phi} on top of the hyperbolic metric, with phi a sum
// of compactly supported radial caps over a word-ball orbit of the domain's
// base point. The truncation keeps phi exactly invariant on a neighborhood of
// the domain once the word radius exceeds the cap reach; the leftover
// residual is measured at construction. Curvature must stay pinched negative
// (K in [-kappa1, -kappa0], certified on a grid) or the build throws.
struct ConformalMetric {
  FuchsianGroup group;
  double eps = 0;
  int word_radius = 0;
  double support_radius = 2.0;
  std::vector<cplx> centers;       // orbit of the base point under short words
  double kappa0 = 1, kappa1 = 1;   // certified pinch (slightly widened)
  double invariance_residual = 0;  // max |phi(gen*p) - phi(p)| over probes

  // phi, its Euclidean gradient, and its hyperbolic Laplacian y^2*(pxx+pyy).
  void derivs(cplx z, double& phi, double& phix, double& phiy, double& lap) const;
  double phi(cplx z) const;
  double curvature(cplx z) const;  // e^{-2 phi} (-1 - lap_hyp phi)
};

ConformalMetric build_invariant_bump(const FuchsianGroup& G, double eps,
                                     int word_radius, double support_radius = 2.0);

// Unit-speed geodesic state in the conformal metric (isothermal coordinates),
// carrying the Riccati curvature u of the unstable horocycle and the running
// unstable log-Jacobian integral jac with d(jac)/dt = u.
struct GeodesicVCState {
  cplx z{0.0, 1.0};
  double theta = 0;
  double u = 1;
  double time = 0;
  double jac = 0;
  long crossings = 0;
};

// One classical 4th-order step of size dt <= 1e-3 on (z, theta, u, jac);
// domain exits reduce through the side pairing (u and jac are invariants).
GeodesicVCState geodesic_riccati_step(const ConformalMetric& m, GeodesicVCState s,
                                      double dt);
GeodesicVCState geodesic_vc_advance(const ConformalMetric& m, GeodesicVCState s,
                                    double dt, long n_steps);

struct JacobianLog {
  double value = 0;  // integral of u over [0, T] after washout
  double T = 0;
  long steps = 0;
  double u_start = 0, u_end = 0;
};

// Washes out the Riccati initialization along the backward orbit for T_pre
// (required >= 20/sqrt(kappa0)), then accumulates the unstable log-Jacobian
// over [0, T] from the given position and direction.
JacobianLog unstable_log_jacobian(const ConformalMetric& m, GeodesicVCState x,
                                  double T, double T_pre);

// A pair of states on the same unstable leaf, built from a common past: the
// base orbit is flowed backward, the far point is offset along the unstable
// tangent by d_target / (accumulated expansion), and both points are flowed
// forward together while recording their log-Jacobian profiles. Before the
// branch point the orbits coincide exactly, so backward Jacobian differences
// saturate at the branch depth; the leftover true tail is of the order of the
// reported offset h0.
struct UnstablePair {
  GeodesicVCState x, y;
  std::vector<double> profile_x, profile_y;  // jac after each forward-leg step
  double dt = 0;
  double T_branch = 0;   // forward-leg length (branch depth)
  double h0 = 0;         // offset applied at the branch point
  double d = 0;          // achieved distance between arrival positions
  double past_residual = 0;  // bound on the non-coincidence of pasts (= h0)
};

UnstablePair make_unstable_pair(const ConformalMetric& m, cplx z, double theta,
                                double d_target);

// log of the backward Jacobian ratio over the window [-T, 0]; constant in T
// beyond the branch depth because the pasts coincide.
double pair_log_psi(const UnstablePair& pair, double T);

struct PsiUReport {
  double psi = 1, log_psi = 0;
  double defect = 0;  // |log psi(T) - log psi(2T)|
  double T = 0;
  double past_residual = 0;
};

PsiUReport psi_u(const ConformalMetric& m, const UnstablePair& pair, double T);

struct DistortionReport {
  double C = 0;
  double T = 0;
  std::vector<double> distances;
  std::vector<double> log_ratios;
};

DistortionReport distortion_constant(const ConformalMetric& m,
                                     const std::vector<UnstablePair>& pairs,
                                     double T);

}  // namespace folia
