#include "folia/curvature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace folia {

namespace {

constexpr double kStepDt = 1e-3;  // fixed integrator step for reproducibility

cplx frame_apply(const Frame& f, cplx z) {
  return (f.a * z + f.b) / (f.c * z + f.d);
}

// radial cap f(s) = (1 - s^2)^4 with f', f'' in the scaled variable s = d/R
void cap_profile(double s, double& f, double& fp, double& fpp) {
  const double m = 1.0 - s * s;
  const double m2 = m * m;
  f = m2 * m2;
  fp = -8.0 * s * m * m2;
  fpp = 8.0 * m2 * (7.0 * s * s - 1.0);
}

// Accumulates phi and derivatives from the listed centers (all when idx null).
void eval_centers(const ConformalMetric& m, const int* idx, std::size_t nidx, cplx z,
                  double& phi, double& phix, double& phiy, double& lap) {
  phi = phix = phiy = lap = 0;
  if (m.eps == 0.0) return;
  const double R = m.support_radius;
  const double coshR = std::cosh(R);
  const double x = z.real(), y = z.imag();
  const std::size_t n = idx ? nidx : m.centers.size();
  for (std::size_t t = 0; t < n; ++t) {
    const cplx c = m.centers[idx ? std::size_t(idx[t]) : t];
    const double dxc = x - c.real(), dyc = y - c.imag();
    const double r2 = dxc * dxc + dyc * dyc;
    const double yyc = y * c.imag();
    const double Q = 1.0 + r2 / (2.0 * yyc);
    if (Q >= coshR) continue;
    const double d = std::acosh(Q);
    double f, fp, fpp;
    cap_profile(d / R, f, fp, fpp);
    phi += m.eps * f;
    if (Q - 1.0 < 1e-14) {
      lap += m.eps * (-16.0) / (R * R);  // 2 f''(0)/R^2 at the cap center
      continue;
    }
    const double inv = 1.0 / std::sqrt(Q * Q - 1.0);
    const double dQx = dxc / yyc;
    const double dQy = dyc / yyc - r2 / (2.0 * y * yyc);
    const double bp = fp / R;
    phix += m.eps * bp * dQx * inv;
    phiy += m.eps * bp * dQy * inv;
    lap += m.eps * (fpp / (R * R) + bp * Q * inv);  // f'' + f' coth(d)
  }
}

// Active-center cache for stepping: rebuilt after moving ~0.8 in hyperbolic
// distance or after a domain reduction jump.
struct Probe {
  const ConformalMetric* m = nullptr;
  std::vector<int> active;
  cplx z_ref{0.0, 1.0};
  bool fresh = false;

  explicit Probe(const ConformalMetric& cm) : m(&cm) {}

  static double cosh_dist(cplx a, cplx b) {
    const double dx = a.real() - b.real(), dy = a.imag() - b.imag();
    return 1.0 + (dx * dx + dy * dy) / (2.0 * a.imag() * b.imag());
  }

  void ensure(cplx z) {
    if (fresh && cosh_dist(z, z_ref) <= std::cosh(0.8)) return;
    active.clear();
    const double reach = std::cosh(m->support_radius + 1.0);
    for (std::size_t i = 0; i < m->centers.size(); ++i)
      if (cosh_dist(z, m->centers[i]) < reach) active.push_back(int(i));
    z_ref = z;
    fresh = true;
  }

  void eval(cplx z, double& phi, double& phix, double& phiy, double& lap) {
    ensure(z);
    eval_centers(*m, active.data(), active.size(), z, phi, phix, phiy, lap);
  }
};

struct Deriv {
  double dx = 0, dy = 0, dth = 0, du = 0, dj = 0;
};

Deriv rhs(const ConformalMetric& m, Probe& P, double x, double y, double th,
          double u, bool check_pinch) {
  double phi, phix, phiy, lap;
  P.eval(cplx(x, y), phi, phix, phiy, lap);
  const double K = std::exp(-2.0 * phi) * (-1.0 - lap);
  if (check_pinch && (K > -m.kappa0 + 1e-6 || K < -m.kappa1 - 1e-6))
    throw std::runtime_error("geodesic_riccati_step: curvature " +
                             std::to_string(K) + " outside the certified pinch");
  const double e = y * std::exp(-phi);  // e^{-lambda}, lambda = phi - log y
  const double c = std::cos(th), s = std::sin(th);
  Deriv d;
  d.dx = e * c;
  d.dy = e * s;
  d.dth = e * (-phix * s + (phiy - 1.0 / y) * c);
  d.du = -u * u - K;
  d.dj = u;
  return d;
}

GeodesicVCState step_core(const ConformalMetric& m, Probe& P, GeodesicVCState s,
                          double dt) {
  const double sq0 = std::sqrt(m.kappa0), sq1 = std::sqrt(m.kappa1);
  const bool started_in = s.u >= sq0 - 1e-6 && s.u <= sq1 + 1e-6;

  const Deriv k1 = rhs(m, P, s.z.real(), s.z.imag(), s.theta, s.u, true);
  const double h = dt / 2;
  const Deriv k2 = rhs(m, P, s.z.real() + h * k1.dx, s.z.imag() + h * k1.dy,
                       s.theta + h * k1.dth, s.u + h * k1.du, false);
  const Deriv k3 = rhs(m, P, s.z.real() + h * k2.dx, s.z.imag() + h * k2.dy,
                       s.theta + h * k2.dth, s.u + h * k2.du, false);
  const Deriv k4 = rhs(m, P, s.z.real() + dt * k3.dx, s.z.imag() + dt * k3.dy,
                       s.theta + dt * k3.dth, s.u + dt * k3.du, false);
  const double w = dt / 6.0;
  s.z = cplx(s.z.real() + w * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx),
             s.z.imag() + w * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy));
  s.theta += w * (k1.dth + 2 * k2.dth + 2 * k3.dth + k4.dth);
  s.u += w * (k1.du + 2 * k2.du + 2 * k3.du + k4.du);
  s.jac += w * (k1.dj + 2 * k2.dj + 2 * k3.dj + k4.dj);
  s.time += dt;

  if (started_in && (s.u < sq0 - 2e-6 || s.u > sq1 + 2e-6))
    throw std::runtime_error("geodesic_riccati_step: Riccati variable left the "
                             "invariant interval");
  return s;
}

GeodesicVCState step_with_probe(const ConformalMetric& m, Probe& P,
                                GeodesicVCState s, double dt) {
  s = step_core(m, P, s, dt);
  if (!m.group.domain.contains(s.z)) {
    const Frame r = reduce_visit(m.group, frame_from(s.z, s.theta), 1000000,
                                 [&](int) { ++s.crossings; });
    s.z = frame_base_point(r);
    s.theta = frame_direction(r);
    P.fresh = false;
  }
  return s;
}

GeodesicVCState advance(const ConformalMetric& m, Probe& P, GeodesicVCState s,
                        double dt, long n) {
  for (long i = 0; i < n; ++i) s = step_with_probe(m, P, s, dt);
  return s;
}

}  // namespace

void ConformalMetric::derivs(cplx z, double& phi_, double& phix, double& phiy,
                             double& lap) const {
  eval_centers(*this, nullptr, 0, z, phi_, phix, phiy, lap);
}

double ConformalMetric::phi(cplx z) const {
  double p, px, py, l;
  derivs(z, p, px, py, l);
  return p;
}

double ConformalMetric::curvature(cplx z) const {
  double p, px, py, l;
  derivs(z, p, px, py, l);
  return std::exp(-2.0 * p) * (-1.0 - l);
}

ConformalMetric build_invariant_bump(const FuchsianGroup& G, double eps,
                                     int word_radius, double support_radius) {
  if (!(eps >= 0) || eps > 0.1)
    throw std::invalid_argument("build_invariant_bump: amplitude must lie in [0, 0.1]");
  if (word_radius < 2)
    throw std::invalid_argument("build_invariant_bump: word radius must be >= 2");
  if (!(support_radius > 0.1) || support_radius > 3.0)
    throw std::invalid_argument("build_invariant_bump: support radius out of range");

  ConformalMetric m;
  m.group = G;
  m.eps = eps;
  m.word_radius = word_radius;
  m.support_radius = support_radius;

  const cplx z0 = G.domain.base_point;
  const int g = int(G.generators.size());
  m.centers.push_back(z0);
  std::vector<std::pair<Frame, int>> level;
  level.emplace_back(Frame{}, 0);
  for (int len = 1; len <= word_radius; ++len) {
    std::vector<std::pair<Frame, int>> next;
    for (const auto& [w, last] : level) {
      for (int l = -g; l <= g; ++l) {
        if (l == 0 || l == -last) continue;
        const Frame wl = frame_mul(w, G.letter_elem(l));
        m.centers.push_back(frame_apply(wl, z0));
        next.emplace_back(wl, l);
      }
    }
    level.swap(next);
  }

  // pinch certificate on a dense grid over the fundamental domain
  const FundamentalDomain& dom = G.domain;
  const int nG = 160;
  double kmin = 0, kmax = 0;
  bool any = false;
  for (int iy = 0; iy < nG; ++iy) {
    for (int ix = 0; ix < nG; ++ix) {
      const cplx z(dom.x0 + (dom.x1 - dom.x0) * (ix + 0.5) / nG,
                   dom.y0 + (dom.y1 - dom.y0) * (iy + 0.5) / nG);
      if (!dom.contains(z)) continue;
      const double K = m.curvature(z);
      if (!any) {
        kmin = kmax = K;
        any = true;
      } else {
        kmin = std::min(kmin, K);
        kmax = std::max(kmax, K);
      }
    }
  }
  if (!any) throw std::runtime_error("build_invariant_bump: empty certificate grid");
  if (!(kmax < 0))
    throw std::runtime_error("build_invariant_bump: curvature pinch failed, max K = " +
                             std::to_string(kmax));
  const double widen = 0.02 * (kmax - kmin) + (kmax > kmin ? 1e-9 : 0.0);
  m.kappa0 = -kmax - widen;
  m.kappa1 = -kmin + widen;
  if (!(m.kappa0 > 0))
    throw std::runtime_error("build_invariant_bump: pinch margin collapsed");

  // invariance residual on probe points mapped by each generator
  double res = 0;
  for (int iy = 0; iy < 10; ++iy) {
    for (int ix = 0; ix < 10; ++ix) {
      const cplx z(dom.x0 + (dom.x1 - dom.x0) * (ix + 0.5) / 10,
                   dom.y0 + (dom.y1 - dom.y0) * (iy + 0.5) / 10);
      if (!dom.contains(z)) continue;
      const double p = m.phi(z);
      for (const Frame& gen : G.generators)
        res = std::max(res, std::fabs(m.phi(frame_apply(gen, z)) - p));
    }
  }
  m.invariance_residual = res;
  return m;
}

GeodesicVCState geodesic_riccati_step(const ConformalMetric& m, GeodesicVCState s,
                                      double dt) {
  if (!(dt > 0) || dt > 1e-3)
    throw std::invalid_argument("geodesic_riccati_step: dt must lie in (0, 1e-3]");
  Probe P(m);
  return step_with_probe(m, P, s, dt);
}

GeodesicVCState geodesic_vc_advance(const ConformalMetric& m, GeodesicVCState s,
                                    double dt, long n_steps) {
  if (!(dt > 0) || dt > 1e-3)
    throw std::invalid_argument("geodesic_vc_advance: dt must lie in (0, 1e-3]");
  if (n_steps < 0) throw std::invalid_argument("geodesic_vc_advance: negative steps");
  Probe P(m);
  return advance(m, P, s, dt, n_steps);
}

JacobianLog unstable_log_jacobian(const ConformalMetric& m, GeodesicVCState x,
                                  double T, double T_pre) {
  if (!(T > 0)) throw std::invalid_argument("unstable_log_jacobian: T must be > 0");
  if (!(T_pre >= 20.0 / std::sqrt(m.kappa0)))
    throw std::invalid_argument("unstable_log_jacobian: washout shorter than "
                                "20/sqrt(kappa0)");
  Probe P(m);
  const long n_pre = long(T_pre / kStepDt + 0.5);
  const long n = long(T / kStepDt + 0.5);

  GeodesicVCState b = x;
  b.theta += M_PI;  // walk to the far past
  b.u = 1;
  b = advance(m, P, b, kStepDt, n_pre);
  b.theta += M_PI;  // forward again, washing out the Riccati initialization
  b.u = 1;
  b = advance(m, P, b, kStepDt, n_pre);

  JacobianLog out;
  out.u_start = b.u;
  b.jac = 0;
  b = advance(m, P, b, kStepDt, n);
  out.value = b.jac;
  out.T = T;
  out.steps = n;
  out.u_end = b.u;
  return out;
}

UnstablePair make_unstable_pair(const ConformalMetric& m, cplx z, double theta,
                                double d_target) {
  if (!(d_target > 0) || d_target > 0.5)
    throw std::invalid_argument("make_unstable_pair: distance must lie in (0, 0.5]");
  const double T_b = 25.0;
  const double T_pre = 30.0 / std::sqrt(m.kappa0);
  const long n_b = long(T_b / kStepDt + 0.5);
  const long n_pre = long(T_pre / kStepDt + 0.5);
  Probe P(m);

  GeodesicVCState s;
  s.z = z;
  s.theta = theta + M_PI;
  s.u = 1;
  s = advance(m, P, s, kStepDt, n_b + n_pre);
  s.theta += M_PI;
  s.u = 1;
  GeodesicVCState q = advance(m, P, s, kStepDt, n_pre);  // branch point
  q.jac = 0;
  q.time = 0;

  UnstablePair pair;
  pair.dt = kStepDt;
  pair.T_branch = T_b;
  pair.profile_x.reserve(n_b + 1);
  pair.profile_y.reserve(n_b + 1);

  // dry run along the x-branch to size the initial offset
  {
    GeodesicVCState probe = q;
    for (long i = 0; i < n_b; ++i) probe = step_with_probe(m, P, probe, kStepDt);
    const double A = std::exp(probe.jac);
    const double h0 = d_target / A;
    if (!(h0 > 1e-280))
      throw std::runtime_error("make_unstable_pair: offset underflow, no common past");
    pair.h0 = h0;
    pair.past_residual = h0;
  }

  // offset along the unit tangent of the unstable horocycle through q
  double phi, phix, phiy, lap;
  P.fresh = false;
  P.eval(q.z, phi, phix, phiy, lap);
  const double e = q.z.imag() * std::exp(-phi);
  const double psi = q.theta - M_PI / 2;
  const double cp = std::cos(psi), sp = std::sin(psi);
  const double kconn = e * (-phix * sp + (phiy - 1.0 / q.z.imag()) * cp);
  GeodesicVCState sx = q;
  GeodesicVCState sy = q;
  sy.z += pair.h0 * e * cplx(cp, sp);
  sy.theta += pair.h0 * (kconn - q.u);

  // lockstep advance: whenever the x-branch leaves the domain, both branches
  // are moved by the same deck element, so the arrival copies stay comparable
  pair.profile_x.push_back(0.0);
  pair.profile_y.push_back(0.0);
  for (long i = 0; i < n_b; ++i) {
    sx = step_core(m, P, sx, kStepDt);
    sy = step_core(m, P, sy, kStepDt);
    if (!m.group.domain.contains(sx.z)) {
      Frame acc;
      const Frame rx = reduce_visit(m.group, frame_from(sx.z, sx.theta), 1000000,
                                    [&](int k) {
                                      acc = frame_mul(m.group.side_elems[k], acc);
                                      ++sx.crossings;
                                    });
      sx.z = frame_base_point(rx);
      sx.theta = frame_direction(rx);
      const Frame ry = frame_mul(acc, frame_from(sy.z, sy.theta));
      sy.z = frame_base_point(ry);
      sy.theta = frame_direction(ry);
      sy.crossings = sx.crossings;
      P.fresh = false;
    }
    pair.profile_x.push_back(sx.jac);
    pair.profile_y.push_back(sy.jac);
  }
  pair.x = sx;
  pair.y = sy;

  pair.d = hyperbolic_distance(pair.x.z, pair.y.z) * std::exp(m.phi(pair.x.z));
  return pair;
}

double pair_log_psi(const UnstablePair& pair, double T) {
  if (!(T > 0)) throw std::invalid_argument("pair_log_psi: T must be > 0");
  if (pair.profile_x.size() < 2 || pair.profile_x.size() != pair.profile_y.size())
    throw std::invalid_argument("pair_log_psi: pair lacks Jacobian profiles");
  const long n = long(pair.profile_x.size()) - 1;
  long back = long(std::min(T, pair.T_branch) / pair.dt + 0.5);
  if (back > n) back = n;
  const std::size_t idx = std::size_t(n - back);
  return (pair.profile_y.back() - pair.profile_y[idx]) -
         (pair.profile_x.back() - pair.profile_x[idx]);
}

PsiUReport psi_u(const ConformalMetric&, const UnstablePair& pair, double T) {
  if (!(T >= 50)) throw std::invalid_argument("psi_u: T must be >= 50");
  PsiUReport r;
  r.T = T;
  r.log_psi = pair_log_psi(pair, T);
  r.psi = std::exp(r.log_psi);
  r.defect = std::fabs(r.log_psi - pair_log_psi(pair, 2 * T));
  r.past_residual = pair.past_residual;
  return r;
}

DistortionReport distortion_constant(const ConformalMetric&,
                                     const std::vector<UnstablePair>& pairs,
                                     double T) {
  if (pairs.empty()) throw std::invalid_argument("distortion_constant: no pairs");
  DistortionReport rep;
  rep.T = T;
  for (const UnstablePair& p : pairs) {
    const double lp = pair_log_psi(p, T);
    rep.log_ratios.push_back(lp);
    rep.distances.push_back(p.d);
    if (p.d > 0) rep.C = std::max(rep.C, std::fabs(lp) / p.d);
  }
  return rep;
}

}  // namespace folia
