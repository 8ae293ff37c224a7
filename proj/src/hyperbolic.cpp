#include "folia/hyperbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace folia {

double wrap_angle(double a) {
  const double two_pi = 6.283185307179586476925286766559;
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  return a;
}

Frame frame_renormalized(const Frame& g) {
  const double s = 1.0 / std::sqrt(g.det());
  return Frame{g.a * s, g.b * s, g.c * s, g.d * s, 0};
}

Frame frame_mul(const Frame& g, const Frame& h) {
  Frame r{g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
          g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d,
          (g.ops > h.ops ? g.ops : h.ops) + 1};
  if (r.ops >= kRenormEvery) return frame_renormalized(r);
  return r;
}

cplx frame_base_point(const Frame& g) {
  const cplx i(0.0, 1.0);
  return (g.a * i + g.b) / (g.c * i + g.d);
}

double frame_direction(const Frame& g) {
  // pushforward of the upward vector at i: arg(g'(i) * i) with g'(z)=det/(cz+d)^2
  const cplx den(g.d, g.c);  // c*i + d
  return wrap_angle(1.5707963267948966 - 2.0 * std::arg(den));
}

Frame frame_from(cplx z, double theta) {
  if (!(z.imag() > 0.0))
    throw std::invalid_argument("frame_from: point must lie in the upper half-plane");
  const double sy = std::sqrt(z.imag());
  // translation taking i to z, direction-preserving
  Frame t{sy, z.real() / sy, 0.0, 1.0 / sy, 0};
  // rotation at i turning the direction by (theta - pi/2): g k_phi turns by -2 phi
  const double phi = -0.5 * (theta - 1.5707963267948966);
  const double cp = std::cos(phi), sp = std::sin(phi);
  Frame k{cp, -sp, sp, cp, 0};
  return frame_mul(t, k);
}

Frame geodesic_advance(const Frame& g, double t) {
  const double e = std::exp(0.5 * t), f = 1.0 / e;
  Frame r{g.a * e, g.b * f, g.c * e, g.d * f, g.ops + 1};
  if (r.ops >= kRenormEvery) return frame_renormalized(r);
  return r;
}

Frame horocycle_advance(const Frame& g, double s, bool stable) {
  Frame r = stable ? Frame{g.a, g.a * s + g.b, g.c, g.c * s + g.d, g.ops + 1}
                   : Frame{g.a + g.b * s, g.b, g.c + g.d * s, g.d, g.ops + 1};
  if (r.ops >= kRenormEvery) return frame_renormalized(r);
  return r;
}

Frame frame_reversed(const Frame& g) {
  // right multiplication by [[0,1],[-1,0]]
  Frame r{-g.b, g.a, -g.d, g.c, g.ops + 1};
  if (r.ops >= kRenormEvery) return frame_renormalized(r);
  return r;
}

double frame_dist(const Frame& g, const Frame& h) {
  auto n = [](double a, double b, double c, double d) {
    return std::sqrt(a * a + b * b + c * c + d * d);
  };
  const double dm = n(g.a - h.a, g.b - h.b, g.c - h.c, g.d - h.d);
  const double dp = n(g.a + h.a, g.b + h.b, g.c + h.c, g.d + h.d);
  return dm < dp ? dm : dp;
}

double hyperbolic_distance(cplx z1, cplx z2) {
  const double dx = z1.real() - z2.real();
  const double dy = z1.imag() - z2.imag();
  const double y1 = z1.imag(), y2 = z2.imag();
  if (!(y1 > 0.0) || !(y2 > 0.0))
    throw std::invalid_argument("hyperbolic_distance: points must lie in the upper half-plane");
  const double q = (dx * dx + dy * dy) / (2.0 * y1 * y2);
  // acosh(1+q) computed stably for small q
  return std::log1p(q + std::sqrt(q * (q + 2.0)));
}

BoundaryPoint BoundaryPoint::of(double p, double q) {
  const double n = std::hypot(p, q);
  if (!(n > 0.0)) throw std::invalid_argument("BoundaryPoint: zero vector");
  BoundaryPoint r;
  r.p = p / n;
  r.q = q / n;
  if (r.q < 0 || (r.q == 0 && r.p < 0)) {  // canonical sign
    r.p = -r.p;
    r.q = -r.q;
  }
  return r;
}

GeodesicEndpoints endpoints(const Frame& g) {
  return GeodesicEndpoints{BoundaryPoint::of(g.b, g.d), BoundaryPoint::of(g.a, g.c)};
}

SpherePoint SpherePoint::from_homogeneous(cplx v1, cplx v2) {
  const double n = std::sqrt(std::norm(v1) + std::norm(v2));
  if (!(n > 0.0)) throw std::invalid_argument("SpherePoint: zero vector");
  SpherePoint r;
  r.v1 = v1 / n;
  r.v2 = v2 / n;
  return r;
}

SpherePoint SpherePoint::from_affine(cplx z) {
  return from_homogeneous(z, cplx(1.0, 0.0));
}

void SpherePoint::unit3(double& x, double& y, double& z) const {
  const cplx w = 2.0 * v1 * std::conj(v2);
  x = w.real();
  y = w.imag();
  z = std::norm(v1) - std::norm(v2);
}

double SpherePoint::angle_to(const SpherePoint& o) const {
  // |<v,w>| for unit spinors: angle on the sphere is 2*acos(|<v,w>|)
  const cplx ip = std::conj(v1) * o.v1 + std::conj(v2) * o.v2;
  double m = std::abs(ip);
  if (m > 1.0) m = 1.0;
  return 2.0 * std::acos(m);
}

MoebiusC MoebiusC::normalized() const {
  const cplx dt = det();
  if (std::abs(dt) < 1e-300) throw std::invalid_argument("MoebiusC: singular matrix");
  const cplx s = 1.0 / std::sqrt(dt);
  return MoebiusC{a * s, b * s, c * s, d * s};
}

MoebiusC operator*(const MoebiusC& m, const MoebiusC& n) {
  return MoebiusC{m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                  m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

SpherePoint mobius_apply(const MoebiusC& m, const SpherePoint& v) {
  return SpherePoint::from_homogeneous(m.a * v.v1 + m.b * v.v2, m.c * v.v1 + m.d * v.v2);
}

double spherical_derivative(const MoebiusC& m, const SpherePoint& v) {
  const cplx dt = m.det();
  if (std::abs(dt - cplx(1.0, 0.0)) > 1e-9)
    throw std::invalid_argument("spherical_derivative: matrix must have unit determinant");
  const cplx w1 = m.a * v.v1 + m.b * v.v2;
  const cplx w2 = m.c * v.v1 + m.d * v.v2;
  return 1.0 / (std::norm(w1) + std::norm(w2));
}

}  // namespace folia
