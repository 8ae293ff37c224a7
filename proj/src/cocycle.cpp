#include "folia/cocycle.hpp"

#include <cmath>
#include <stdexcept>

namespace folia {

MoebiusC Representation::letter_image(int letter) const {
  if (letter == 0 || std::abs(letter) > int(images.size()))
    throw std::invalid_argument("letter out of range");
  return letter > 0 ? images[letter - 1] : images[-letter - 1].inverse();
}

MoebiusC Representation::evaluate(const Word& w) const {
  MoebiusC acc;
  for (int l : w.letters) acc = acc * letter_image(l);
  return acc.normalized();
}

Representation rep_inclusion(const FuchsianGroup& G) {
  Representation r;
  r.tag = "fuchsian";
  for (const Frame& g : G.generators) r.images.push_back(MoebiusC::from_frame(g));
  return r;
}

namespace {

MoebiusC su2(double theta, double phi) {
  MoebiusC m;
  m.a = std::polar(std::cos(phi), theta);
  m.b = cplx(-std::sin(phi), 0);
  m.c = cplx(std::sin(phi), 0);
  m.d = std::polar(std::cos(phi), -theta);
  return m;
}

}  // namespace

Representation rep_unitary(const FuchsianGroup& G) {
  // Two fixed non-commuting rotations U, V. For the genus-2 relator the
  // assignment (U, V, V, U) closes up: [U,V][V,U] = I identically.
  Representation r;
  r.tag = "unitary";
  const MoebiusC U = su2(1.0, 0.7), V = su2(2.2, 1.3);
  if (G.generators.size() == 4) {
    r.images = {U, V, V, U};
  } else {
    r.images.assign(G.generators.size(), U);
    if (r.images.size() > 1) r.images[1] = V;
  }
  return r;
}

Representation rep_trivial(const FuchsianGroup& G) {
  Representation r;
  r.tag = "custom";
  r.images.assign(G.generators.size(), MoebiusC{});
  return r;
}

Representation rep_quasi_fuchsian(const FuchsianGroup& G) {
  // Conjugate the inclusion by a fixed non-real matrix: still a homomorphism,
  // preserves a (non-round-in-coordinates) circle, same north-south dynamics.
  Representation r = rep_inclusion(G);
  r.tag = "quasi-fuchsian-like";
  MoebiusC c;
  c.a = cplx(1.0, 0.0);
  c.b = cplx(0.0, 0.35);
  c.c = cplx(0.12, 0.0);
  c.d = cplx(1.0, 0.0);
  c = c.normalized();
  const MoebiusC cinv = c.inverse();
  for (MoebiusC& m : r.images) m = (c * m * cinv).normalized();
  return r;
}

Representation rep_preset(const FuchsianGroup& G, const std::string& name) {
  if (name == "inclusion" || name == "fuchsian") return rep_inclusion(G);
  if (name == "unitary") return rep_unitary(G);
  if (name == "trivial") return rep_trivial(G);
  if (name == "quasi-fuchsian" || name == "quasi-fuchsian-like")
    return rep_quasi_fuchsian(G);
  throw std::invalid_argument("unknown representation preset: " + name);
}

SpherePoint random_fiber(Rng& rng) {
  // Uniform on the unit 3-sphere of homogeneous pairs = round measure on the
  // quotient sphere.
  double n1, n2, n3, n4, norm2;
  do {
    n1 = rng.normal();
    n2 = rng.normal();
    n3 = rng.normal();
    n4 = rng.normal();
    norm2 = n1 * n1 + n2 * n2 + n3 * n3 + n4 * n4;
  } while (norm2 < 1e-12);
  return SpherePoint::from_homogeneous(cplx(n1, n2), cplx(n3, n4));
}

SkewState random_state(const FuchsianGroup& G, Rng& rng) {
  SkewState s;
  const cplx z = G.domain.sample_point(rng);
  const double theta = rng.uniform(-M_PI, M_PI);
  s.frame = frame_from(z, theta);
  s.fiber = random_fiber(rng);
  return s;
}

SkewState time_reversed(const SkewState& s) {
  SkewState r = s;
  r.frame = frame_reversed(s.frame);
  return r;
}

SkewState evolve(const FuchsianGroup& G, const Representation& rep, SkewState s,
                 double dt, long n_steps,
                 const std::function<void(const SkewState&)>& sink) {
  if (!(dt > 0 && dt <= 1.0)) throw std::invalid_argument("dt must be in (0,1]");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  for (long i = 0; i < n_steps; ++i) {
    s.frame = geodesic_advance(s.frame, dt);
    s.frame = reduce_visit(G, s.frame, 1000000, [&](int k) {
      const MoebiusC h = rep.letter_image(G.side_elem_letter[k]);
      s.log_deriv += std::log(spherical_derivative(h, s.fiber));
      s.fiber = mobius_apply(h, s.fiber);
    });
    s.time += dt;
    if (sink) sink(s);
  }
  return s;
}

ExponentEstimate transverse_lyapunov(const FuchsianGroup& G,
                                     const Representation& rep,
                                     std::uint64_t seed, double T, double dt,
                                     int N, int workers) {
  if (T < 100) throw std::invalid_argument("T must be >= 100");
  if (!(dt > 0 && dt <= 1.0)) throw std::invalid_argument("dt must be in (0,1]");
  if (N < 1) throw std::invalid_argument("N must be >= 1");

  const long n_steps = long(T / dt + 0.5);
  ExponentEstimate est;
  est.T = T;
  est.dt = dt;
  est.N = N;
  est.per_orbit.reserve(N);
  ordered_map_fold<double>(
      N, resolve_workers(workers),
      [&](int i) {
        Rng rng = Rng::stream(seed, std::uint64_t(i));
        SkewState s = random_state(G, rng);
        s = evolve(G, rep, s, dt, n_steps);
        return s.log_deriv / (double(n_steps) * dt);
      },
      [&](int, double v) { est.per_orbit.push_back(v); });

  double sum = 0;
  for (double v : est.per_orbit) sum += v;
  est.mean = sum / N;
  if (N > 1) {
    double ss = 0;
    for (double v : est.per_orbit) ss += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(ss / (double(N) * (N - 1)));
  }
  return est;
}

}  // namespace folia
