#include "folia/surface_group.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "folia/kernels.hpp"

namespace folia {
namespace {

// The polygon presets are assembled in extended precision so that the
// closed relator and side identifications hold well below double roundoff.
using ld = long double;
using lcplx = std::complex<ld>;

struct LFrame {
  ld a, b, c, d;
};

LFrame lmul(const LFrame& f, const LFrame& g) {
  return {f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
          f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d};
}

LFrame lnormalized(const LFrame& f) {
  const ld s = std::sqrt(f.a * f.d - f.b * f.c);
  return {f.a / s, f.b / s, f.c / s, f.d / s};
}

LFrame linv(const LFrame& f) {
  const LFrame n = lnormalized(f);
  return {n.d, -n.b, -n.c, n.a};
}

lcplx lapply(const LFrame& f, lcplx z) {
  return (f.a * z + f.b) / (f.c * z + f.d);
}

// Orientation-preserving isometry sending u to i and v up the imaginary axis.
LFrame lmove_to_axis(lcplx u, lcplx v) {
  const ld xu = u.real(), yu = u.imag();
  const ld s = std::sqrt(yu);
  const LFrame t{1 / s, -xu / s, 0, s};
  const lcplx w = lapply(t, v);
  ld phi = ld(0.5) * std::atan2(ld(-2) * w.real(), std::norm(w) - 1);
  LFrame k{std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)};
  if (std::abs(lapply(k, w)) < 1) {
    phi += ld(1.5707963267948966192313216916398L);
    k = LFrame{std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)};
  }
  return lmul(k, t);
}

// Isometry with q0 -> p0 and q1 -> p1 (requires d(q0,q1) == d(p0,p1)).
LFrame ltwo_point(lcplx q0, lcplx q1, lcplx p0, lcplx p1) {
  return lmul(linv(lmove_to_axis(p0, p1)), lmove_to_axis(q0, q1));
}

Frame to_frame(const LFrame& f) {
  const LFrame n = lnormalized(f);
  Frame out;
  out.a = double(n.a);
  out.b = double(n.b);
  out.c = double(n.c);
  out.d = double(n.d);
  return out;
}

SideGeom side_between(cplx z0, cplx z1, cplx interior) {
  SideGeom s;
  s.v0 = z0;
  s.v1 = z1;
  if (std::abs(z0.real() - z1.real()) < 1e-13) {
    s.A = 0;
    s.B = 1;
    s.C = -z0.real();
  } else {
    const double c =
        (std::norm(z0) - std::norm(z1)) / (2 * (z0.real() - z1.real()));
    const double r2 = std::norm(z0 - c);
    s.A = -1;
    s.B = 2 * c;
    s.C = r2 - c * c;
  }
  if (s.sign(interior) < 0) {
    s.A = -s.A;
    s.B = -s.B;
    s.C = -s.C;
  }
  return s;
}

void fit_bbox(FundamentalDomain& dom) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto take = [&](cplx z) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  };
  for (const SideGeom& s : dom.sides) {
    if (s.ideal0 || s.ideal1) continue;
    if (s.A == 0) {
      take(s.v0);
      take(s.v1);
      continue;
    }
    const double c = -s.B / (2 * s.A);
    const double a0 = std::arg(s.v0 - c), a1 = std::arg(s.v1 - c);
    const double r = std::abs(s.v0 - c);
    for (int i = 0; i <= 64; ++i) {
      const double t = double(i) / 64;
      const double a = (1 - t) * a0 + t * a1;
      take(cplx(c + r * std::cos(a), r * std::sin(a)));
    }
  }
  const double pad = 1e-9 * std::max(1.0, std::max(std::abs(x0), std::abs(x1)));
  dom.x0 = x0 - pad;
  dom.x1 = x1 + pad;
  dom.y0 = std::max(y0 - pad, 0.0);
  dom.y1 = y1 + pad;
}

double safe_dist(cplx z, cplx w) {
  if (z.imag() <= 0 || w.imag() <= 0) return std::numeric_limits<double>::infinity();
  const double q = std::norm(z - w) / (2 * z.imag() * w.imag());
  return std::log1p(q + std::sqrt(q * (q + 2)));
}

BoundaryPoint frame_act_boundary(const Frame& f, const BoundaryPoint& b) {
  return BoundaryPoint::of(f.a * b.p + f.b * b.q, f.c * b.p + f.d * b.q);
}

// Interior angle at the vertex shared by two sides, both finite there.
double corner_angle(const SideGeom& in, const SideGeom& out, cplx v) {
  auto tangent_toward = [&](const SideGeom& s, cplx other) {
    cplx t;
    if (s.A == 0) {
      t = cplx(0, 1);
    } else {
      const double centre = -s.B / (2 * s.A);
      t = cplx(0, 1) * (v - centre);
    }
    if ((t.real() * (other - v).real() + t.imag() * (other - v).imag()) < 0) t = -t;
    return t / std::abs(t);
  };
  const cplx t_out = tangent_toward(out, out.v1);
  const cplx t_in = tangent_toward(in, in.v0);
  const double dot = t_out.real() * t_in.real() + t_out.imag() * t_in.imag();
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

}  // namespace

void FundamentalDomain::finalize() {
  const std::size_t n = sides.size();
  sa.resize(n);
  sb.resize(n);
  sc.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sa[k] = sides[k].A;
    sb[k] = sides[k].B;
    sc[k] = sides[k].C;
  }
}

bool FundamentalDomain::contains(cplx z) const {
  const int n = int(sides.size());
  const auto m = kernels::side_mask_fn()(z.real(), z.imag(), sa.data(),
                                         sb.data(), sc.data(), n);
  if (m.negative) return false;
  for (std::uint32_t zs = m.zero; zs; zs &= zs - 1) {
    const int k = __builtin_ctz(zs);
    if (!(k < pairing[k])) return false;  // boundary owned by the smaller index
  }
  return true;
}

cplx FundamentalDomain::sample_point(Rng& rng) const {
  // Cusped domains pinch to zero width like y^2 as y -> 0, so proposals below
  // 1e-4 are pure waste: the excluded tail carries under 1e-4 of the total
  // area while keeping the acceptance rate of the 1/y^2 proposal workable.
  const double ylo = std::max(y0, 1e-4);
  const double inv_hi = 1.0 / ylo, inv_lo = 1.0 / y1;
  for (int it = 0; it < 1000000; ++it) {
    const double x = rng.uniform(x0, x1);
    const double y = 1.0 / rng.uniform(inv_lo, inv_hi);  // density 1/y^2 in y
    const cplx z(x, y);
    if (contains(z)) return z;
  }
  throw std::runtime_error("sample_point: rejection sampling failed");
}

Frame FuchsianGroup::letter_elem(int letter) const {
  if (letter == 0 || std::abs(letter) > int(generators.size()))
    throw std::invalid_argument("letter out of range");
  return letter > 0 ? generators[letter - 1] : generators[-letter - 1].inverse();
}

Frame FuchsianGroup::evaluate(const Word& w) const {
  Frame acc;
  for (int l : w.letters) acc = frame_mul(acc, letter_elem(l));
  return acc;
}

FuchsianGroup preset_genus2() {
  // Regular octagon, all corners pi/4, built in the disk and moved to the
  // half-plane. Edge word a b a' b' c d c' d' read counterclockwise; each
  // letter's two sides are glued with reversed boundary orientation.
  const ld pi = 3.14159265358979323846264338328L;
  // cosh(circumradius) = cot(pi/8) * cot(angle/2) with corner angle pi/4,
  // so the eight corners close up into a single smooth vertex.
  const ld cot8 = 1 / std::tan(pi / 8);
  const ld rho = std::acosh(cot8 * cot8);
  const ld r = std::tanh(rho / 2);
  lcplx v[8];
  for (int k = 0; k < 8; ++k) {
    const ld th = pi / 8 + k * pi / 4;
    const lcplx w(r * std::cos(th), r * std::sin(th));
    v[k] = lcplx(0, 1) * (lcplx(1, 0) + w) / (lcplx(1, 0) - w);
  }

  // Chosen so the vertex cycle spells the commutator word a b a' b' c d c' d'.
  const int letter_of_side[8] = {+1, -2, -1, +2, +3, -4, -3, +4};
  FuchsianGroup G;
  G.name = "genus2";
  G.compact = true;
  G.chi_abs = 2;
  G.relator_is_parabolic = false;
  G.generators.resize(4);
  G.side_elems.resize(8);
  G.side_elem_letter.resize(8);
  G.domain.pairing.resize(8);

  int side_of_letter[9] = {0};  // index by letter+4
  for (int k = 0; k < 8; ++k) side_of_letter[letter_of_side[k] + 4] = k;

  for (int x = 1; x <= 4; ++x) {
    const int i = side_of_letter[x + 4];   // side carrying the letter
    const int j = side_of_letter[-x + 4];  // side carrying its inverse
    const LFrame g = ltwo_point(v[j], v[(j + 1) % 8], v[(i + 1) % 8], v[i]);
    G.generators[x - 1] = to_frame(g);
    G.side_elems[j] = to_frame(g);
    G.side_elems[i] = to_frame(linv(g));
    G.side_elem_letter[j] = +x;
    G.side_elem_letter[i] = -x;
    G.domain.pairing[i] = j;
    G.domain.pairing[j] = i;
  }

  G.domain.base_point = cplx(0, 1);  // disk centre under the chart change
  for (int k = 0; k < 8; ++k) {
    const cplx z0(double(v[k].real()), double(v[k].imag()));
    const cplx z1(double(v[(k + 1) % 8].real()), double(v[(k + 1) % 8].imag()));
    G.domain.sides.push_back(side_between(z0, z1, G.domain.base_point));
  }
  fit_bbox(G.domain);
  G.domain.finalize();
  return G;
}

FuchsianGroup preset_punctured_torus() {
  FuchsianGroup G;
  G.name = "punctured-torus";
  G.compact = false;
  G.chi_abs = 1;
  G.relator_is_parabolic = true;

  Frame A, B;
  A.a = 1; A.b = 1; A.c = 1; A.d = 2;
  B.a = 1; B.b = -1; B.c = -1; B.d = 2;
  G.generators = {A, B};

  // Ideal quadrilateral -1, 0, 1, oo; sides in counterclockwise order.
  G.domain.base_point = cplx(0, 1);
  G.domain.pairing = {2, 3, 0, 1};
  const cplx zm1(-1, 0), z0(0, 0), zp1(1, 0);
  SideGeom s0 = side_between(zm1, z0, G.domain.base_point);
  s0.ideal0 = true; s0.ideal1 = true;
  s0.b0 = BoundaryPoint::of(-1, 1); s0.b1 = BoundaryPoint::of(0, 1);
  SideGeom s1 = side_between(z0, zp1, G.domain.base_point);
  s1.ideal0 = true; s1.ideal1 = true;
  s1.b0 = BoundaryPoint::of(0, 1); s1.b1 = BoundaryPoint::of(1, 1);
  SideGeom s2;  // vertical line x = 1, from 1 to oo
  s2.A = 0; s2.B = 1; s2.C = -1;
  if (s2.sign(G.domain.base_point) < 0) { s2.B = -s2.B; s2.C = -s2.C; }
  s2.v0 = zp1; s2.ideal0 = true; s2.ideal1 = true;
  s2.b0 = BoundaryPoint::of(1, 1); s2.b1 = BoundaryPoint::of(1, 0);
  SideGeom s3;  // vertical line x = -1, from oo to -1
  s3.A = 0; s3.B = 1; s3.C = 1;
  if (s3.sign(G.domain.base_point) < 0) { s3.B = -s3.B; s3.C = -s3.C; }
  s3.v1 = zm1; s3.ideal0 = true; s3.ideal1 = true;
  s3.b0 = BoundaryPoint::of(1, 0); s3.b1 = BoundaryPoint::of(-1, 1);
  G.domain.sides = {s0, s1, s2, s3};

  // B maps side 2 onto side 0, A maps side 3 onto side 1.
  G.side_elems = {B.inverse(), A.inverse(), B, A};
  G.side_elem_letter = {-2, -1, +2, +1};

  G.domain.x0 = -1;
  G.domain.x1 = 1;
  G.domain.y0 = 0;
  G.domain.y1 = 8.0;  // histogram window; the cusp itself is unbounded
  G.domain.finalize();
  return G;
}

Frame reduce_visit(const FuchsianGroup& G, Frame g, int budget,
                   const std::function<void(int)>& on_cross) {
  const int n = int(G.side_elems.size());
  const cplx base = G.domain.base_point;
  int steps = 0;
  while (!G.domain.contains(frame_base_point(g))) {
    if (++steps > budget) throw std::runtime_error("reduce: step budget exhausted");
    const cplx z = frame_base_point(g);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const Frame& e = G.side_elems[k];
      const cplx zk =
          (cplx(e.a, 0) * z + cplx(e.b, 0)) / (cplx(e.c, 0) * z + cplx(e.d, 0));
      const double d = safe_dist(zk, base);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best < 0) throw std::runtime_error("reduce: no admissible move");
    g = frame_mul(G.side_elems[best], g);
    if (on_cross) on_cross(best);
  }
  return g;
}

ReduceResult reduce(const FuchsianGroup& G, const Frame& g, int budget) {
  ReduceResult res;
  res.word.letters.reserve(8);
  res.reduced = reduce_visit(G, g, budget, [&](int k) {
    ++res.steps;
    res.word.letters.push_back(-G.side_elem_letter[k]);
  });
  return res;
}

GroupVerification verify_group(const FuchsianGroup& G, double tol) {
  GroupVerification out;

  Frame R;
  if (G.generators.size() == 4) {
    const Frame &a = G.generators[0], &b = G.generators[1];
    const Frame &c = G.generators[2], &d = G.generators[3];
    for (const Frame& f : {a, b, a.inverse(), b.inverse(),
                           c, d, c.inverse(), d.inverse()})
      R = frame_mul(R, f);
  } else if (G.generators.size() == 2) {
    const Frame &a = G.generators[0], &b = G.generators[1];
    R = frame_mul(frame_mul(a, b), frame_mul(a.inverse(), b.inverse()));
  } else {
    throw std::invalid_argument("verify_group: unsupported generator count");
  }
  R = frame_renormalized(R);
  if (G.relator_is_parabolic) {
    out.relator_residual = std::abs(std::abs(R.a + R.d) - 2.0);
  } else {
    Frame id;
    out.relator_residual = frame_dist(R, id);  // folds the sign ambiguity
  }

  const int n = int(G.domain.sides.size());
  out.side_residuals.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const int j = G.domain.pairing[k];
    const SideGeom &sk = G.domain.sides[k], &sj = G.domain.sides[j];
    const Frame& e = G.side_elems[k];
    double r = 0;
    // Endpoint order flips across a gluing: start of k lands on end of j.
    if (sk.ideal0) {
      r += frame_act_boundary(e, sk.b0).chordal(sj.b1);
    } else {
      const cplx im = (cplx(e.a, 0) * sk.v0 + cplx(e.b, 0)) /
                      (cplx(e.c, 0) * sk.v0 + cplx(e.d, 0));
      r += std::abs(im - sj.v1);
    }
    if (sk.ideal1) {
      r += frame_act_boundary(e, sk.b1).chordal(sj.b0);
    } else {
      const cplx im = (cplx(e.a, 0) * sk.v1 + cplx(e.b, 0)) /
                      (cplx(e.c, 0) * sk.v1 + cplx(e.d, 0));
      r += std::abs(im - sj.v0);
    }
    // The paired side's element must invert this one.
    Frame comp = frame_mul(G.side_elems[j], e);
    Frame id;
    r += frame_dist(frame_renormalized(comp), id);
    out.side_residuals[k] = r;
    out.max_side_residual = std::max(out.max_side_residual, r);
  }

  double angle_sum = 0;
  for (int k = 0; k < n; ++k) {
    const SideGeom& prev = G.domain.sides[(k + n - 1) % n];
    const SideGeom& cur = G.domain.sides[k];
    if (cur.ideal0) continue;  // ideal corners contribute nothing
    angle_sum += corner_angle(prev, cur, cur.v0);
  }
  out.area = (n - 2) * M_PI - angle_sum;
  out.area_defect = std::abs(out.area - 2 * M_PI * G.chi_abs);

  out.min_abs_trace = std::numeric_limits<double>::infinity();
  for (const Frame& g : G.generators) {
    const Frame gn = frame_renormalized(g);
    out.min_abs_trace = std::min(out.min_abs_trace, std::abs(gn.a + gn.d));
  }
  out.hyperbolic_generators = out.min_abs_trace > 2.0;

  out.pass = out.relator_residual < tol && out.max_side_residual < tol &&
             out.area_defect < 1e-6 && out.hyperbolic_generators;
  return out;
}

}  // namespace folia
