#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "folia/measures.hpp"

using namespace folia;

namespace {

// equal-area sampling of the sphere: z uniform, longitude uniform
SpherePoint area_uniform_sphere(Rng& rng) {
  const double z = rng.uniform(-1, 1);
  const double l = rng.uniform(0, 2 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1 - z * z));
  const double x = r * std::cos(l), y = r * std::sin(l);
  // affine chart w = (x + i y) / (1 - z), chart-safe via homogeneous form
  return SpherePoint::from_homogeneous(cplx(x, y), cplx(1.0 - z, 0.0));
}

EmpiricalMeasure atom_measure(const FuchsianGroup& G, cplx z, double th,
                              const SpherePoint& f) {
  EmpiricalMeasure m(GridSpec::for_domain(G.domain));
  m.add(frame_from(z, th), f, 1.0);
  m.finish();
  return m;
}

}  // namespace

TEST_CASE("fiber cells partition the sphere into equal areas") {
  Rng rng(3);
  const int n = 240000;
  int counts[3][32] = {};
  for (int i = 0; i < n; ++i) {
    const SpherePoint v = area_uniform_sphere(rng);
    double x, y, z;
    v.unit3(x, y, z);
    for (int s = 0; s < 3; ++s) {
      const int c = fiber_cell(s, v);
      REQUIRE(c >= 0);
      REQUIRE(c < (s == 0 ? 8 : s == 1 ? 16 : 32));
      CHECK(c == fiber_cell(s, x, y, z));
      ++counts[s][c];
    }
  }
  for (int s = 0; s < 3; ++s) {
    const int cells = s == 0 ? 8 : s == 1 ? 16 : 32;
    const double expect = double(n) / cells;
    for (int c = 0; c < cells; ++c)
      CHECK(std::fabs(counts[s][c] / expect - 1.0) < 0.05);
  }
}

TEST_CASE("fiber cell centers land in their own cells") {
  for (int s = 0; s < 3; ++s) {
    const int cells = s == 0 ? 8 : s == 1 ? 16 : 32;
    for (int c = 0; c < cells; ++c) {
      const SpherePoint& v = fiber_cell_center(s, c);
      double x, y, z;
      v.unit3(x, y, z);
      CHECK(std::fabs(x * x + y * y + z * z - 1.0) < 1e-9);
      CHECK(fiber_cell(s, v) == c);
    }
  }
}

TEST_CASE("single sample occupies exactly one cell at every scale") {
  const FuchsianGroup G = preset_genus2();
  Rng rng(5);
  const cplx z = G.domain.sample_point(rng);
  const EmpiricalMeasure m = atom_measure(G, z, 1.0, random_fiber(rng));
  CHECK(m.mass_ok());
  CHECK(m.total == 1.0);
  for (int s = 0; s < GridSpec::kScales; ++s) {
    int nonzero = 0;
    double sum = 0;
    for (double v : m.mass[s]) {
      if (v != 0) ++nonzero;
      sum += v;
    }
    CHECK(nonzero == 1);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(std::accumulate(m.base32.begin(), m.base32.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::accumulate(m.fiber32.begin(), m.fiber32.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("accumulate mixes mass linearly and finish renormalizes") {
  const FuchsianGroup G = preset_genus2();
  Rng rng(7);
  const cplx z1 = G.domain.sample_point(rng), z2 = G.domain.sample_point(rng);
  const EmpiricalMeasure a = atom_measure(G, z1, 0.3, random_fiber(rng));
  const EmpiricalMeasure b = atom_measure(G, z2, 2.9, random_fiber(rng));
  EmpiricalMeasure mix(a.grid);
  mix.accumulate(a, 1.0);
  mix.accumulate(b, 3.0);
  mix.finish();
  CHECK(mix.mass_ok());
  // the two finest cells carry 1/4 and 3/4
  double lo = 1e9, hi = 0;
  for (double v : mix.mass[2])
    if (v > 0) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  CHECK(lo == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("histogram metric: axioms on atoms and orbit measures") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  Rng rng(11);
  const cplx z1 = G.domain.sample_point(rng);
  cplx z2;
  do { z2 = G.domain.sample_point(rng); } while (std::abs(z2 - z1) < 0.5);
  const SpherePoint f1 = random_fiber(rng);
  const EmpiricalMeasure a = atom_measure(G, z1, 1.0, f1);
  const EmpiricalMeasure a2 = atom_measure(G, z1, 1.0, f1);
  const EmpiricalMeasure b = atom_measure(G, z2, 1.0 + M_PI, random_fiber(rng));

  CHECK(bl_distance(a, a2) == 0.0);
  CHECK(tv_distance(a, a2) == 0.0);
  CHECK(bl_distance(a, b) == doctest::Approx(1.0));  // disjoint at all scales
  CHECK(tv_distance(a, b) == doctest::Approx(1.0));

  SkewState s1, s2, s3;
  s1.frame = frame_from(z1, 0.7); s1.fiber = f1;
  s2.frame = frame_from(z2, 1.9); s2.fiber = random_fiber(rng);
  s3.frame = frame_from(G.domain.sample_point(rng), 4.0); s3.fiber = random_fiber(rng);
  const EmpiricalMeasure m1 = birkhoff_empirical(G, rep, s1, 50, 0.05);
  const EmpiricalMeasure m2 = birkhoff_empirical(G, rep, s2, 50, 0.05);
  const EmpiricalMeasure m3 = birkhoff_empirical(G, rep, s3, 50, 0.05);
  const double d12 = bl_distance(m1, m2), d13 = bl_distance(m1, m3),
               d23 = bl_distance(m2, m3);
  CHECK(bl_distance(m2, m1) == d12);
  CHECK(d12 >= 0.0);
  CHECK(d12 <= 1.0);
  CHECK(d13 <= d12 + d23 + 1e-12);
  CHECK(tv_distance(m1, m2) >= bl_distance(m1, m2) - 1e-12);  // finest dominates

  // different domains are not comparable
  const FuchsianGroup H = preset_punctured_torus();
  EmpiricalMeasure other(GridSpec::for_domain(H.domain));
  other.add(Frame{}, f1, 1.0);
  other.finish();
  CHECK_THROWS_AS((void)bl_distance(a, other), std::invalid_argument);
}

TEST_CASE("orbit measures normalize and stay windowed-invariant") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  Rng rng(13);
  SkewState s;
  s.frame = frame_from(G.domain.sample_point(rng), rng.uniform(0, 2 * M_PI));
  s.fiber = random_fiber(rng);
  const double T = 200, dt = 0.05;
  const EmpiricalMeasure m = birkhoff_empirical(G, rep, s, T, dt);
  CHECK(m.mass_ok());
  CHECK(m.origin.valid);
  CHECK(m.origin.T == T);

  // a shift by s replaces an s-long prefix with an s-long suffix: the finest
  // total variation can grow at most s/T, and matches it when cells differ
  for (double shift : {0.5, 1.0, 2.0}) {
    const double d = invariance_defect(G, rep, m, shift);
    CHECK(d >= 0.0);
    CHECK(d <= shift / T + 2 * dt / T + 1e-12);
  }
  CHECK_THROWS(invariance_defect(G, rep, m, 0.0));
  CHECK_THROWS(invariance_defect(G, rep, m, T));  // shift capped at T/10
}

TEST_CASE("invariance defect requires an orbit-backed measure") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  Rng rng(17);
  const EmpiricalMeasure a =
      atom_measure(G, G.domain.sample_point(rng), 0.5, random_fiber(rng));
  CHECK_THROWS(invariance_defect(G, rep, a, 1.0));
}

TEST_CASE("attractor classification by single linkage") {
  const FuchsianGroup G = preset_genus2();
  Rng rng(19);
  const cplx z1 = G.domain.base_point;
  cplx z2;
  do { z2 = G.domain.sample_point(rng); } while (std::abs(z2 - z1) < 0.6);
  const SpherePoint f1 = random_fiber(rng), f2 = random_fiber(rng);

  std::vector<EmpiricalMeasure> ms;
  for (int i = 0; i < 5; ++i) ms.push_back(atom_measure(G, z1, 1.0, f1));
  for (int i = 0; i < 4; ++i) ms.push_back(atom_measure(G, z2, 2.0, f2));

  const AttractorSet two = classify_attractors(ms, 0.1);
  CHECK(two.representatives.size() == 2);
  REQUIRE(two.labels.size() == 9);
  for (int i = 0; i < 5; ++i) CHECK(two.labels[i] == two.labels[0]);
  for (int i = 5; i < 9; ++i) CHECK(two.labels[i] == two.labels[5]);
  CHECK(two.labels[0] != two.labels[5]);
  CHECK(two.min_rep_separation == doctest::Approx(1.0));

  // a huge radius merges everything; reps of one cluster report separation 0
  const AttractorSet one = classify_attractors(ms, 1.5);
  CHECK(one.representatives.size() == 1);
  CHECK(one.min_rep_separation == 0.0);

  CHECK_THROWS(classify_attractors({}, 0.1));
}

TEST_CASE("arc average with a single sample is the orbit average") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  const Frame g = frame_from(G.domain.base_point, 0.9);
  const EmpiricalMeasure arc = unstable_arc_empirical(G, rep, g, 0.0, 1, 80, 0.05, 21);
  Rng rng = Rng::stream(21, 0);
  SkewState s;
  s.frame = reduce(G, g).reduced;
  s.fiber = random_fiber(rng);
  const EmpiricalMeasure orbit = birkhoff_empirical(G, rep, s, 80, 0.05);
  CHECK(bl_distance(arc, orbit) == 0.0);

  // a genuine arc of starts stays close to the pooled orbit picture
  const EmpiricalMeasure fan = unstable_arc_empirical(G, rep, g, 0.2, 8, 80, 0.05, 21);
  CHECK(fan.mass_ok());
  CHECK(bl_distance(fan, orbit) < 0.8);
}

TEST_CASE("forward averages concentrate at the backward endpoint section") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);
  Rng rng(23);
  SkewState s = random_state(G, rng);
  const EmpiricalMeasure m = birkhoff_empirical(G, rep, s, 400, 0.05);
  CHECK(m.endpoint_concentration(true) > 0.8);
  CHECK(m.endpoint_concentration(true) > m.endpoint_concentration(false));
}

TEST_CASE("time reversal comparison separates fuchsian, not unitary") {
  const FuchsianGroup G = preset_genus2();
  const ReversalComparison f =
      compare_time_reversal(G, rep_inclusion(G), 500, 0.05, 24, 31, 4);
  CHECK(f.tv > 0.6);
  CHECK(f.plus_near_bwd > 0.8);
  CHECK(f.minus_near_fwd > 0.8);
  CHECK(f.mu_plus.mass_ok());
  CHECK(f.mu_minus.mass_ok());

  const ReversalComparison u =
      compare_time_reversal(G, rep_unitary(G), 1000, 0.05, 100, 31, 4);
  CHECK(u.tv < 0.2);
}

TEST_CASE("domain mask: plausible coverage, empty cells filled by long runs") {
  const FuchsianGroup G = preset_genus2();
  const std::vector<std::uint8_t> mask = base32_domain_mask(G.domain);
  REQUIRE(mask.size() == 1024);
  int on = 0;
  for (auto b : mask) on += b;
  CHECK(on > 400);
  CHECK(on < 900);

  const Representation rep = rep_inclusion(G);
  Rng rng(29);
  EmpiricalMeasure pool(GridSpec::for_domain(G.domain));
  for (int i = 0; i < 4; ++i) {
    SkewState s = random_state(G, rng);
    pool.accumulate(birkhoff_empirical(G, rep, s, 400, 0.05), 1.0);
  }
  pool.finish();
  const int empty = empty_base32_cells(pool, mask);
  CHECK(empty >= 0);
  CHECK(empty < on / 4);  // 4 x 400 time units already fill most of the domain
}

TEST_CASE("visibility labels directions by their limiting measure") {
  const FuchsianGroup G = preset_genus2();
  const Representation rep = rep_inclusion(G);

  std::vector<EmpiricalMeasure> starts;
  Rng rng(37);
  for (int i = 0; i < 4; ++i) {
    SkewState s = random_state(G, rng);
    starts.push_back(birkhoff_empirical(G, rep, s, 1500, 0.05));
  }
  const AttractorSet att = classify_attractors(starts, 0.3);
  REQUIRE(att.representatives.size() == 1);

  const VisibilityEstimate v =
      visibility(G, rep, att, G.domain.base_point, 8, 1500, 0.05, 41, 4);
  CHECK(v.n_dirs == 8);
  REQUIRE(v.f.size() == 1);
  REQUIRE(v.counts.size() == 1);
  CHECK(v.unlabeled_fraction < 0.5);
  if (v.counts[0] > 0) {
    CHECK(v.f[0] == doctest::Approx(1.0));
    CHECK(v.half_width[0] >= 0.0);
  }
  CHECK_THROWS(visibility(G, rep, AttractorSet{}, cplx(0, 1), 4, 50, 0.05, 1));
}
