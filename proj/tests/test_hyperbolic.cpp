#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "folia/hyperbolic.hpp"
#include "folia/rng.hpp"

using namespace folia;

namespace {

Frame random_frame(Rng& rng) {
  // random point + direction, so det is 1 by construction
  const cplx z(rng.uniform(-2, 2), std::exp(rng.uniform(-1.5, 1.5)));
  return frame_from(z, rng.uniform(0, 2 * M_PI));
}

double dist_oracle(cplx z1, cplx z2) {
  // acosh form, independent of the library's log/atanh choice
  const double num = std::norm(z1 - z2);
  return std::acosh(1.0 + num / (2.0 * z1.imag() * z2.imag()));
}

SpherePoint random_sphere(Rng& rng) {
  return SpherePoint::from_homogeneous(cplx(rng.normal(), rng.normal()),
                                       cplx(rng.normal(), rng.normal()));
}

}  // namespace

TEST_CASE("frame_from places the tangent vector where asked") {
  // vertical vector at 2i is the diagonal scaling by 2: diag(sqrt 2, 1/sqrt 2)
  const Frame g = frame_from(cplx(0, 2), M_PI / 2);
  CHECK(std::fabs(g.a - std::sqrt(2.0)) < 1e-12);
  CHECK(std::fabs(g.b) < 1e-12);
  CHECK(std::fabs(g.c) < 1e-12);
  CHECK(std::fabs(g.d - 1.0 / std::sqrt(2.0)) < 1e-12);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const cplx z(rng.uniform(-3, 3), std::exp(rng.uniform(-2, 2)));
    const double th = rng.uniform(0, 2 * M_PI);
    const Frame f = frame_from(z, th);
    CHECK(std::fabs(f.det() - 1.0) < 1e-12);
    CHECK(std::abs(frame_base_point(f) - z) < 1e-10 * (1 + std::abs(z)));
    const double dth = std::fabs(wrap_angle(frame_direction(f) - th));
    CHECK(std::min(dth, 2 * M_PI - dth) < 1e-9);
  }
}

TEST_CASE("geodesic flow moves unit speed along the right geodesic") {
  // identity frame: up from i, endpoints 0 (past) and infinity (future)
  const GeodesicEndpoints e = endpoints(Frame{});
  CHECK(e.backward.finite());
  CHECK(std::fabs(e.backward.value()) < 1e-14);
  CHECK(!e.forward.finite());

  const Frame g1 = geodesic_advance(Frame{}, 1.25);
  CHECK(std::abs(frame_base_point(g1) - cplx(0, std::exp(1.25))) < 1e-12);

  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Frame g = random_frame(rng);
    const double t = rng.uniform(0.01, 3.0);
    const Frame h = geodesic_advance(g, t);
    CHECK(std::fabs(hyperbolic_distance(frame_base_point(g), frame_base_point(h)) - t) <
          1e-9);
    // flow property
    const Frame h2 = geodesic_advance(geodesic_advance(g, t / 2), t / 2);
    CHECK(frame_dist(h, h2) < 1e-9);
    // endpoints are flow-invariant
    const GeodesicEndpoints e0 = endpoints(g), e1 = endpoints(h);
    CHECK(e0.forward.chordal(e1.forward) < 1e-9);
    CHECK(e0.backward.chordal(e1.backward) < 1e-9);
  }
}

TEST_CASE("endpoints are the Moebius images of 0 and infinity") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Frame g = random_frame(rng);
    const GeodesicEndpoints e = endpoints(g);
    // g*0 = b/d and g*inf = a/c, compared projectively
    CHECK(e.backward.chordal(BoundaryPoint::of(g.b, g.d)) < 1e-12);
    CHECK(e.forward.chordal(BoundaryPoint::of(g.a, g.c)) < 1e-12);
  }
}

TEST_CASE("horocycle advance contracts along the matching flow direction") {
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const Frame g = random_frame(rng);
    const double s = rng.uniform(-0.5, 0.5);
    for (bool stable : {true, false}) {
      const Frame h = horocycle_advance(g, s, stable);
      const double t = 6.0;
      const Frame a = geodesic_advance(g, stable ? t : -t);
      const Frame b = geodesic_advance(h, stable ? t : -t);
      const double before = hyperbolic_distance(frame_base_point(g), frame_base_point(h));
      const double after = hyperbolic_distance(frame_base_point(a), frame_base_point(b));
      CHECK(after < before * std::exp(-t) * 1.5 + 1e-12);
      // the two orbits share the relevant endpoint
      const GeodesicEndpoints eg = endpoints(g), eh = endpoints(h);
      if (stable)
        CHECK(eg.forward.chordal(eh.forward) < 1e-12);
      else
        CHECK(eg.backward.chordal(eh.backward) < 1e-12);
    }
  }
}

TEST_CASE("reversal is an involution and swaps endpoints") {
  Rng rng(19);
  for (int i = 0; i < 100; ++i) {
    const Frame g = random_frame(rng);
    const Frame r = frame_reversed(g);
    CHECK(std::abs(frame_base_point(r) - frame_base_point(g)) < 1e-10);
    const double dth = std::fabs(wrap_angle(frame_direction(r) - frame_direction(g)));
    CHECK(std::fabs(dth - M_PI) < 1e-9);
    CHECK(frame_dist(frame_reversed(r), g) < 1e-12);
    const GeodesicEndpoints e = endpoints(g), er = endpoints(r);
    CHECK(e.forward.chordal(er.backward) < 1e-12);
    CHECK(e.backward.chordal(er.forward) < 1e-12);
  }
}

TEST_CASE("hyperbolic distance: closed form, symmetry, invariance") {
  CHECK(std::fabs(hyperbolic_distance(cplx(0, 1), cplx(0, std::exp(2.0))) - 2.0) < 1e-12);
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const cplx z(rng.uniform(-2, 2), std::exp(rng.uniform(-1, 1)));
    const cplx w(rng.uniform(-2, 2), std::exp(rng.uniform(-1, 1)));
    const double d = hyperbolic_distance(z, w);
    CHECK(d == doctest::Approx(dist_oracle(z, w)).epsilon(1e-10));
    CHECK(hyperbolic_distance(w, z) == doctest::Approx(d).epsilon(1e-12));
    // invariance under a random isometry
    const Frame g = random_frame(rng);
    const auto mob = [&](cplx p) { return (g.a * p + g.b) / (g.c * p + g.d); };
    CHECK(hyperbolic_distance(mob(z), mob(w)) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("frame_dist ignores the sign and renormalization keeps det near 1") {
  Frame g = frame_from(cplx(0.3, 1.7), 1.0);
  Frame mg = g;
  mg.a = -mg.a; mg.b = -mg.b; mg.c = -mg.c; mg.d = -mg.d;
  CHECK(frame_dist(g, mg) < 1e-15);
  CHECK(frame_dist(g, Frame{}) > 0.1);

  // g g^{-1} round trips keep the entries bounded while the op counter climbs
  // far past the renormalization threshold; det may only drift by rounding
  Rng rng(29);
  Frame acc;
  for (int i = 0; i < 20000; ++i) {
    const Frame f = random_frame(rng);
    acc = frame_mul(frame_mul(acc, f), f.inverse());
  }
  CHECK(acc.ops < kRenormEvery);
  CHECK(std::fabs(acc.det() - 1.0) < 1e-9);
  CHECK(frame_dist(acc, Frame{}) < 1e-6);
}

TEST_CASE("boundary points: normalization and chordal gauge") {
  CHECK(BoundaryPoint::of(3, 6).value() == doctest::Approx(0.5));
  const BoundaryPoint zero = BoundaryPoint::of(0, 1);
  const BoundaryPoint inf = BoundaryPoint::of(1, 0);
  CHECK(zero.chordal(inf) == doctest::Approx(1.0));  // normalized pairs
  CHECK(zero.chordal(zero) == doctest::Approx(0.0));
  CHECK(!inf.finite());
  // chordal is scale-free: [2:2] equals [1:1]
  CHECK(BoundaryPoint::of(2, 2).chordal(BoundaryPoint::of(1, 1)) < 1e-15);
}

TEST_CASE("sphere points: charts, unit coordinates, angles") {
  const SpherePoint south = SpherePoint::from_affine(cplx(0, 0));
  const SpherePoint north = SpherePoint::from_homogeneous(cplx(1, 0), cplx(0, 0));
  double x, y, z;
  south.unit3(x, y, z);
  CHECK(std::fabs(z + 1.0) < 1e-15);
  north.unit3(x, y, z);
  CHECK(std::fabs(z - 1.0) < 1e-15);
  CHECK(south.angle_to(north) == doctest::Approx(M_PI));

  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const cplx w(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const SpherePoint v = SpherePoint::from_affine(w);
    CHECK(std::abs(v.affine() - w) < 1e-12 * (1 + std::abs(w)));
    v.unit3(x, y, z);
    CHECK(std::fabs(x * x + y * y + z * z - 1.0) < 1e-12);
    CHECK(v.angle_to(v) < 1e-7);
    // |w| = 1 sits on the equator
    const SpherePoint eq = SpherePoint::from_affine(std::polar(1.0, rng.uniform(0, 6.28)));
    eq.unit3(x, y, z);
    CHECK(std::fabs(z) < 1e-12);
  }
}

TEST_CASE("Moebius algebra: normalization, inverse, composition") {
  MoebiusC m{cplx(2, 1), cplx(0.5, -0.3), cplx(0, 0.2), cplx(1, 0)};
  const MoebiusC n = m.normalized();
  CHECK(std::abs(n.det() - cplx(1, 0)) < 1e-14);
  const MoebiusC id = (n * n.inverse()).normalized();
  CHECK(std::abs(id.a - cplx(1, 0)) + std::abs(id.b) + std::abs(id.c) +
            std::abs(id.d - cplx(1, 0)) <
        1e-12);

  MoebiusC sing{cplx(1, 0), cplx(2, 0), cplx(2, 0), cplx(4, 0)};
  CHECK_THROWS_AS((void)sing.normalized(), std::invalid_argument);

  const MoebiusC f = MoebiusC::from_frame(Frame{});
  CHECK(std::abs(f.a - cplx(1, 0)) + std::abs(f.d - cplx(1, 0)) < 1e-14);
}

TEST_CASE("spherical derivative: diagonal value, chain rule, unitary rigidity") {
  // diag(e^{1/2}, e^{-1/2}) at the south pole expands by exactly e
  MoebiusC d{cplx(std::exp(0.5), 0), cplx(0, 0), cplx(0, 0), cplx(std::exp(-0.5), 0)};
  CHECK(spherical_derivative(d, SpherePoint::from_affine(cplx(0, 0))) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  Rng rng(37);
  for (int i = 0; i < 100; ++i) {
    const MoebiusC m = MoebiusC{cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal())}
                           .normalized();
    const MoebiusC n = MoebiusC{cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal()),
                                cplx(rng.normal(), rng.normal())}
                           .normalized();
    const SpherePoint v = random_sphere(rng);
    const double lhs = spherical_derivative((m * n).normalized(), v);
    const double rhs = spherical_derivative(m, mobius_apply(n, v)) *
                       spherical_derivative(n, v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));

    // unitary rows: derivative is 1 everywhere on the sphere
    const double a = rng.uniform(0, 2 * M_PI), b = rng.uniform(0, 2 * M_PI);
    const double r = rng.uniform(0, 1), s = std::sqrt(1 - r * r);
    const MoebiusC u{std::polar(r, a), std::polar(s, b), -std::polar(s, -b),
                     std::polar(r, -a)};
    CHECK(std::fabs(spherical_derivative(u, v) - 1.0) < 1e-12);
  }

  MoebiusC bad{cplx(2, 0), cplx(0, 0), cplx(0, 0), cplx(2, 0)};
  CHECK_THROWS(spherical_derivative(bad, SpherePoint{}));
}

TEST_CASE("wrap_angle lands in [0, 2pi)") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(2 * M_PI) == doctest::Approx(0.0));
  CHECK(wrap_angle(-M_PI / 2) == doctest::Approx(1.5 * M_PI));
  CHECK(wrap_angle(7 * M_PI) == doctest::Approx(M_PI));
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(rng.uniform(-50, 50));
    CHECK(w >= 0.0);
    CHECK(w < 2 * M_PI);
  }
}
