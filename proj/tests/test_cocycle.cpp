#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "folia/cocycle.hpp"

using namespace folia;

namespace {

double moebius_dist_pm_identity(const MoebiusC& m) {
  const auto n = [](const MoebiusC& w) {
    return std::abs(w.a - cplx(1, 0)) + std::abs(w.b) + std::abs(w.c) +
           std::abs(w.d - cplx(1, 0));
  };
  MoebiusC neg{-m.a, -m.b, -m.c, -m.d};
  return std::min(n(m), n(neg));
}

Word relator_word(const FuchsianGroup& G) {
  Word w;
  if (G.generators.size() == 4)
    w.letters = {1, 2, -1, -2, 3, 4, -3, -4};
  else
    w.letters = {1, 2, -1, -2};
  return w;
}

}  // namespace

TEST_CASE("representation presets respect the surface relation") {
  const FuchsianGroup G = preset_genus2();
  for (const char* name : {"inclusion", "unitary", "trivial", "quasi-fuchsian"}) {
    const Representation rep = rep_preset(G, name);
    REQUIRE(rep.images.size() == G.generators.size());
    for (const MoebiusC& im : rep.images)
      CHECK(std::abs(im.det() - cplx(1, 0)) < 1e-12);
    const MoebiusC R = rep.evaluate(relator_word(G)).normalized();
    CHECK(moebius_dist_pm_identity(R) < 1e-9);
  }
  CHECK_THROWS_AS((void)rep_preset(G, "nonsense"), std::invalid_argument);
  // alias names resolve to the same presets
  CHECK(rep_preset(G, "fuchsian").tag == rep_preset(G, "inclusion").tag);
  CHECK(rep_preset(G, "quasi-fuchsian-like").tag == rep_preset(G, "quasi-fuchsian").tag);
}

TEST_CASE("letter images invert and words compose") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_quasi_fuchsian(G);
  for (int k = 1; k <= 4; ++k) {
    const MoebiusC p = (rep.letter_image(k) * rep.letter_image(-k)).normalized();
    CHECK(moebius_dist_pm_identity(p) < 1e-12);
  }
  Word w;
  w.letters = {2, -3, 1};
  const MoebiusC lhs = rep.evaluate(w);
  const MoebiusC rhs =
      rep.images[1] * rep.images[2].inverse().normalized() * rep.images[0];
  CHECK(moebius_dist_pm_identity((lhs * rhs.inverse().normalized()).normalized()) <
        1e-10);
}

TEST_CASE("unitary holonomy never stretches the fiber") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_unitary(G);
  Rng rng(3);
  for (const MoebiusC& im : rep.images)
    for (int i = 0; i < 50; ++i)
      CHECK(std::fabs(spherical_derivative(im, random_fiber(rng)) - 1.0) < 1e-12);

  // along a flow orbit the accumulated log derivative stays at rounding level
  SkewState s = random_state(G, rng);
  long crossings = 0;
  SkewState prev = s;
  s = evolve(G, rep, s, 0.05, 400, [&](const SkewState& t) {
    if (t.log_deriv != prev.log_deriv) ++crossings;
    prev = t;
  });
  CHECK(std::fabs(s.log_deriv) < 1e-10);
  CHECK(s.time == doctest::Approx(20.0));
}

TEST_CASE("trivial holonomy pins the fiber point exactly") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_trivial(G);
  Rng rng(5);
  SkewState s = random_state(G, rng);
  const SpherePoint f0 = s.fiber;
  s = evolve(G, rep, s, 0.05, 600);
  CHECK(s.fiber.v1 == f0.v1);
  CHECK(s.fiber.v2 == f0.v2);
  CHECK(s.log_deriv == 0.0);
}

TEST_CASE("evolve is an exact semigroup in the step count") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  Rng rng(9);
  const SkewState s0 = random_state(G, rng);
  const SkewState a = evolve(G, rep, s0, 0.05, 700);
  const SkewState b = evolve(G, rep, evolve(G, rep, s0, 0.05, 300), 0.05, 400);
  CHECK(a.frame.a == b.frame.a);
  CHECK(a.frame.b == b.frame.b);
  CHECK(a.frame.c == b.frame.c);
  CHECK(a.frame.d == b.frame.d);
  CHECK(a.fiber.v1 == b.fiber.v1);
  CHECK(a.fiber.v2 == b.fiber.v2);
  CHECK(a.log_deriv == b.log_deriv);
  // the reduced base point stays inside the domain the whole way
  SkewState probe = s0;
  evolve(G, rep, s0, 0.05, 100, [&](const SkewState& t) {
    CHECK(G.domain.contains(frame_base_point(t.frame)));
  });
}

TEST_CASE("time reversal is an involution fixing base and fiber") {
  const FuchsianGroup G = preset_genus2();
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const SkewState s = random_state(G, rng);
    const SkewState r = time_reversed(s);
    CHECK(std::abs(frame_base_point(r.frame) - frame_base_point(s.frame)) < 1e-10);
    const double flip =
        std::fabs(wrap_angle(frame_direction(r.frame) - frame_direction(s.frame)));
    CHECK(std::fabs(flip - M_PI) < 1e-9);
    CHECK(r.fiber.v1 == s.fiber.v1);
    const SkewState rr = time_reversed(r);
    CHECK(frame_dist(rr.frame, s.frame) < 1e-12);
  }
}

TEST_CASE("random fiber points cover the sphere evenly") {
  Rng rng(13);
  double sx = 0, sy = 0, sz = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const SpherePoint v = random_fiber(rng);
    CHECK(std::fabs(std::norm(v.v1) + std::norm(v.v2) - 1.0) < 1e-12);
    double x, y, z;
    v.unit3(x, y, z);
    sx += x; sy += y; sz += z;
  }
  CHECK(std::fabs(sx / n) < 0.02);
  CHECK(std::fabs(sy / n) < 0.02);
  CHECK(std::fabs(sz / n) < 0.02);
}

TEST_CASE("random states start inside the domain") {
  const FuchsianGroup G = preset_genus2();
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const SkewState s = random_state(G, rng);
    CHECK(G.domain.contains(frame_base_point(s.frame)));
    CHECK(s.log_deriv == 0.0);
    CHECK(s.time == 0.0);
  }
}

TEST_CASE("transverse exponent: value, determinism, worker independence") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);

  const ExponentEstimate e1 = transverse_lyapunov(G, rep, 42, 200, 0.05, 8, 1);
  const ExponentEstimate e4 = transverse_lyapunov(G, rep, 42, 200, 0.05, 8, 4);
  REQUIRE(e1.per_orbit.size() == 8);
  REQUIRE(e4.per_orbit.size() == 8);
  CHECK(std::memcmp(e1.per_orbit.data(), e4.per_orbit.data(),
                    8 * sizeof(double)) == 0);
  CHECK(e1.mean == e4.mean);
  CHECK(e1.stderr_ == e4.stderr_);

  // Fuchsian holonomy contracts at unit rate
  CHECK(std::fabs(e1.mean + 1.0) < 0.1);
  CHECK(e1.ci95() > 0.0);

  // a different seed moves the estimate but not the statistics' scale
  const ExponentEstimate e2 = transverse_lyapunov(G, rep, 43, 200, 0.05, 8, 2);
  CHECK(e2.mean != e1.mean);
  CHECK(std::fabs(e2.mean + 1.0) < 0.1);
}

TEST_CASE("halving the step leaves the exponent estimate in place") {
  // crossings carry the cocycle: the step size only discretizes the base orbit
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  const ExponentEstimate a = transverse_lyapunov(G, rep, 5, 500, 0.05, 8, 4);
  const ExponentEstimate b = transverse_lyapunov(G, rep, 5, 500, 0.025, 8, 4);
  CHECK(std::fabs(a.mean - b.mean) < 0.01);
}

TEST_CASE("quasi-fuchsian holonomy is not conjugate-trivially fuchsian") {
  const FuchsianGroup G = preset_genus2();
  const Representation qf = rep_quasi_fuchsian(G);
  const Representation in = rep_inclusion(G);
  double dev = 0;
  for (std::size_t k = 0; k < qf.images.size(); ++k) {
    dev = std::max(dev, std::abs(qf.images[k].a - in.images[k].a) +
                            std::abs(qf.images[k].b - in.images[k].b));
    // but it is still non-unitary and volume preserving on average
    CHECK(std::abs(qf.images[k].det() - cplx(1, 0)) < 1e-12);
  }
  CHECK(dev > 1e-3);
  const ExponentEstimate e = transverse_lyapunov(G, qf, 7, 300, 0.05, 8, 4);
  CHECK(e.mean < -0.5);
}
