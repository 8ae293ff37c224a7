#pragma once
#include <complex>
#include <cstdint>
#include <utility>

namespace folia {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Upper half-plane and its unit tangent bundle.
//
// A Frame is a real 2x2 matrix of determinant ~1, read modulo sign. The
// correspondence with unit tangent vectors: the identity frame is the vector
// at z = i pointing straight up (angle pi/2), and a matrix g acts on that
// vector by its Moebius action, so base_point(g) = g*i and the direction is
// the pushforward of "up" by g. Geodesic flow is right multiplication by
// diag(e^{t/2}, e^{-t/2}); stable/unstable horocycles are the upper/lower
// unitriangular one-parameter subgroups acting on the right.
// ---------------------------------------------------------------------------
struct Frame {
  double a = 1, b = 0, c = 0, d = 1;  // row-major [[a,b],[c,d]]
  std::uint32_t ops = 0;              // multiplications since last renormalization

  double det() const { return a * d - b * c; }
  Frame inverse() const {
    Frame r{d, -b, -c, a, ops};
    return r;
  }
};

// Determinant drift control: products renormalize by 1/sqrt(det) once the
// accumulated operation count reaches this threshold.
inline constexpr std::uint32_t kRenormEvery = 1000;

Frame frame_mul(const Frame& g, const Frame& h);
Frame frame_renormalized(const Frame& g);

cplx frame_base_point(const Frame& g);
double frame_direction(const Frame& g);  // in [0, 2*pi)

// Unit tangent vector (z, theta) -> frame. Requires Im z > 0.
Frame frame_from(cplx z, double theta);

Frame geodesic_advance(const Frame& g, double t);
Frame horocycle_advance(const Frame& g, double s, bool stable);

// Direction flip: right multiplication by the rotation whose Moebius action
// turns the tangent vector by pi. Involution up to sign.
Frame frame_reversed(const Frame& g);

// min(||g-h||_F, ||g+h||_F): frames are sign-ambiguous.
double frame_dist(const Frame& g, const Frame& h);

double hyperbolic_distance(cplx z1, cplx z2);

// A point of the circle at infinity, as a normalized projective pair [p:q]
// (the boundary point is p/q, with q = 0 meaning infinity). Sign-ambiguous.
struct BoundaryPoint {
  double p = 1, q = 0;
  static BoundaryPoint of(double p, double q);
  double chordal(const BoundaryPoint& o) const {  // |sin| of the projective angle
    double v = p * o.q - q * o.p;
    return v < 0 ? -v : v;
  }
  bool finite(double eps = 1e-300) const { return q > eps || q < -eps; }
  double value() const { return p / q; }
};

struct GeodesicEndpoints {
  BoundaryPoint backward;  // g * 0   (where the orbit came from)
  BoundaryPoint forward;   // g * inf (where the orbit is heading)
};
GeodesicEndpoints endpoints(const Frame& g);

// ---------------------------------------------------------------------------
// Riemann sphere in unit homogeneous coordinates and complex Moebius maps.
// Everything is chart-free: no special case at infinity.
// ---------------------------------------------------------------------------
struct SpherePoint {
  cplx v1{0.0, 0.0}, v2{1.0, 0.0};  // |v1|^2 + |v2|^2 == 1

  static SpherePoint from_affine(cplx z);
  static SpherePoint from_homogeneous(cplx v1, cplx v2);
  static SpherePoint from_boundary(const BoundaryPoint& b) {
    return from_homogeneous(cplx(b.p, 0.0), cplx(b.q, 0.0));
  }
  cplx affine() const { return v1 / v2; }  // may overflow to inf near [1:0]

  // Euclidean coordinates on the unit 2-sphere (affine 0 -> south pole).
  void unit3(double& x, double& y, double& z) const;

  // Round (angular) distance in [0, pi].
  double angle_to(const SpherePoint& o) const;
};

struct MoebiusC {
  cplx a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

  cplx det() const { return a * d - b * c; }
  MoebiusC inverse() const { return MoebiusC{d, -b, -c, a}; }

  // Scales to determinant exactly 1 (principal square root). Throws
  // std::invalid_argument on a singular matrix.
  MoebiusC normalized() const;

  static MoebiusC from_frame(const Frame& g) {
    return MoebiusC{cplx(g.a, 0), cplx(g.b, 0), cplx(g.c, 0), cplx(g.d, 0)}.normalized();
  }
};

MoebiusC operator*(const MoebiusC& m, const MoebiusC& n);

SpherePoint mobius_apply(const MoebiusC& m, const SpherePoint& v);

// Norm of the derivative of the Moebius action in the round metric, for a
// unit-determinant matrix, evaluated at v. Equals (1+|z|^2)/(|cz+d|^2+|az+b|^2)
// in the affine chart, i.e. 1/|M v|^2 for unit homogeneous v; the chain rule
// for compositions is exact in this form. Throws if |det(m)-1| > 1e-9.
double spherical_derivative(const MoebiusC& m, const SpherePoint& v);

double wrap_angle(double a);  // into [0, 2*pi)

}  // namespace folia
