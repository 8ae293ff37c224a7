#include "folia/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "folia/kernels.hpp"
#include "folia/parallel.hpp"

namespace folia {

namespace {

constexpr int kFiberCount[3] = {8, 16, 32};

int clamp_bin(double u, int n) {
  const int i = int(u * n);
  return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

struct CenterTable {
  SpherePoint pt[3][32];
  // flat unit3 coordinates of the finest-scale centers, for fast scans
  double cx[32], cy[32], cz[32];
};

SpherePoint sphere_from_unit3(double x, double y, double z) {
  if (z < -1.0 + 1e-12) return SpherePoint::from_homogeneous(cplx(0, 0), cplx(1, 0));
  const double v1 = std::sqrt(0.5 * (1.0 + z));
  const cplx v2 = cplx(x, -y) / (2.0 * v1);
  return SpherePoint::from_homogeneous(cplx(v1, 0), v2);
}

const CenterTable& centers() {
  static const CenterTable tab = [] {
    CenterTable t;
    double sx[3][32] = {}, sy[3][32] = {}, sz[3][32] = {};
    const int Nz = 512, Np = 1024;  // z-uniform grid: every node has equal area
    for (int i = 0; i < Nz; ++i) {
      const double z = -1.0 + (i + 0.5) * (2.0 / Nz);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < Np; ++j) {
        const double phi = (j + 0.5) * (2.0 * M_PI / Np);
        const double x = r * std::cos(phi), y = r * std::sin(phi);
        for (int s = 0; s < 3; ++s) {
          const int k = fiber_cell(s, x, y, z);
          sx[s][k] += x;
          sy[s][k] += y;
          sz[s][k] += z;
        }
      }
    }
    for (int s = 0; s < 3; ++s) {
      for (int k = 0; k < kFiberCount[s]; ++k) {
        const double n = std::sqrt(sx[s][k] * sx[s][k] + sy[s][k] * sy[s][k] +
                                   sz[s][k] * sz[s][k]);
        t.pt[s][k] = sphere_from_unit3(sx[s][k] / n, sy[s][k] / n, sz[s][k] / n);
        if (s == 2) {
          t.pt[s][k].unit3(t.cx[k], t.cy[k], t.cz[k]);
        }
      }
    }
    return t;
  }();
  return tab;
}

// A fiber point counts as near an endpoint when its finest cell is the cell
// containing the endpoint or the next-nearest cell by center angle.
bool near_endpoint(int cell, const BoundaryPoint& b) {
  const SpherePoint e = SpherePoint::from_boundary(b);
  double ex, ey, ez;
  e.unit3(ex, ey, ez);
  const int cont = fiber_cell(2, ex, ey, ez);
  if (cell == cont) return true;
  const CenterTable& t = centers();
  int second = -1;
  double best = -2.0;
  for (int k = 0; k < 32; ++k) {
    if (k == cont) continue;
    const double d = ex * t.cx[k] + ey * t.cy[k] + ez * t.cz[k];
    if (d > best) {
      best = d;
      second = k;
    }
  }
  return cell == second;
}

double sum_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

void rescale(std::vector<double>& v, double f) {
  for (double& x : v) x *= f;
}

}  // namespace

constexpr int GridSpec::nx[3];
constexpr int GridSpec::ny[3];
constexpr int GridSpec::nd[3];
constexpr int GridSpec::nf[3];

GridSpec GridSpec::for_domain(const FundamentalDomain& dom) {
  GridSpec g;
  g.x0 = dom.x0;
  g.x1 = dom.x1;
  g.y0 = dom.y0;
  g.y1 = dom.y1;
  return g;
}

int fiber_cell(int scale, double x, double y, double z) {
  // A fixed rotation puts the canonical boundary circle (image of R u {oo},
  // where flat-bundle sections concentrate) in general position: without it
  // the sections ride exactly along the octant walls and the partition loses
  // half its resolving power on precisely the measures we care about.
  constexpr double ca = 0.92106099400288508, sa = 0.38941834230865049;
  constexpr double cb = 0.95533648912560598, sb = 0.29552020666133955;
  const double yr = y * ca - z * sa, zr = y * sa + z * ca;
  const double xs = x * cb - yr * sb, ys = x * sb + yr * cb;
  const int oct = (zr < 0 ? 4 : 0) + (ys < 0 ? 2 : 0) + (xs < 0 ? 1 : 0);
  if (scale == 0) return oct;
  const int band = std::fabs(zr) >= 0.5 ? 1 : 0;
  if (scale == 1) return oct * 2 + band;
  const int lng = std::fabs(ys) >= std::fabs(xs) ? 1 : 0;
  return (oct * 2 + band) * 2 + lng;
}

int fiber_cell(int scale, const SpherePoint& v) {
  double x, y, z;
  v.unit3(x, y, z);
  return fiber_cell(scale, x, y, z);
}

const SpherePoint& fiber_cell_center(int scale, int idx) {
  if (scale < 0 || scale >= 3 || idx < 0 || idx >= kFiberCount[scale])
    throw std::out_of_range("fiber_cell_center: bad scale or index");
  return centers().pt[scale][idx];
}

EmpiricalMeasure::EmpiricalMeasure(const GridSpec& g) : grid(g) {
  for (int s = 0; s < GridSpec::kScales; ++s) mass[s].assign(grid.joint_cells(s), 0.0);
  base32.assign(32 * 32, 0.0);
  fiber32.assign(32, 0.0);
  cell_mass.assign(grid.base_cells(2), 0.0);
  cell_near_bwd.assign(grid.base_cells(2), 0.0);
  cell_near_fwd.assign(grid.base_cells(2), 0.0);
}

void EmpiricalMeasure::add(const Frame& g, const SpherePoint& fiber, double w) {
  const cplx z = frame_base_point(g);
  const double th = frame_direction(g);
  double fx, fy, fz;
  fiber.unit3(fx, fy, fz);
  const double ux = (z.real() - grid.x0) / (grid.x1 - grid.x0);
  const double uy = (z.imag() - grid.y0) / (grid.y1 - grid.y0);
  const double ud = th * (0.5 / M_PI);
  int i2 = 0, f2 = 0;
  for (int s = 0; s < GridSpec::kScales; ++s) {
    const int ix = clamp_bin(ux, GridSpec::nx[s]);
    const int iy = clamp_bin(uy, GridSpec::ny[s]);
    const int id = clamp_bin(ud, GridSpec::nd[s]);
    const int jf = fiber_cell(s, fx, fy, fz);
    const std::size_t base =
        (std::size_t(iy) * GridSpec::nx[s] + ix) * GridSpec::nd[s] + id;
    mass[s][base * GridSpec::nf[s] + jf] += w;
    if (s == 2) {
      i2 = int(base);
      f2 = jf;
    }
  }
  base32[std::size_t(clamp_bin(uy, 32)) * 32 + clamp_bin(ux, 32)] += w;
  fiber32[f2] += w;
  cell_mass[i2] += w;
  const GeodesicEndpoints ep = endpoints(g);
  if (near_endpoint(f2, ep.backward)) cell_near_bwd[i2] += w;
  if (near_endpoint(f2, ep.forward)) cell_near_fwd[i2] += w;
  total += w;
}

void EmpiricalMeasure::accumulate(const EmpiricalMeasure& o, double w) {
  if (!(grid == o.grid) || mass[0].size() != o.mass[0].size())
    throw std::invalid_argument("EmpiricalMeasure::accumulate: grid mismatch");
  for (int s = 0; s < GridSpec::kScales; ++s)
    for (std::size_t i = 0; i < mass[s].size(); ++i) mass[s][i] += w * o.mass[s][i];
  for (std::size_t i = 0; i < base32.size(); ++i) base32[i] += w * o.base32[i];
  for (std::size_t i = 0; i < fiber32.size(); ++i) fiber32[i] += w * o.fiber32[i];
  for (std::size_t i = 0; i < cell_mass.size(); ++i) {
    cell_mass[i] += w * o.cell_mass[i];
    cell_near_bwd[i] += w * o.cell_near_bwd[i];
    cell_near_fwd[i] += w * o.cell_near_fwd[i];
  }
  total += w * o.total;
  origin.valid = false;  // a mixture no longer has a single defining orbit
}

void EmpiricalMeasure::finish() {
  if (!(total > 0)) throw std::runtime_error("EmpiricalMeasure::finish: empty measure");
  for (int s = 0; s < GridSpec::kScales; ++s) rescale(mass[s], 1.0 / sum_of(mass[s]));
  rescale(base32, 1.0 / sum_of(base32));
  rescale(fiber32, 1.0 / sum_of(fiber32));
  const double cs = sum_of(cell_mass);
  rescale(cell_mass, 1.0 / cs);
  rescale(cell_near_bwd, 1.0 / cs);
  rescale(cell_near_fwd, 1.0 / cs);
  total = 1.0;
}

bool EmpiricalMeasure::mass_ok(double tol) const {
  for (int s = 0; s < GridSpec::kScales; ++s)
    if (std::fabs(sum_of(mass[s]) - 1.0) > tol) return false;
  return std::fabs(sum_of(base32) - 1.0) <= tol;
}

double EmpiricalMeasure::endpoint_concentration(bool backward) const {
  const std::vector<double>& near = backward ? cell_near_bwd : cell_near_fwd;
  int nonempty = 0, hits = 0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i) {
    if (cell_mass[i] <= 0) continue;
    ++nonempty;
    if (near[i] / cell_mass[i] >= 0.5) ++hits;
  }
  return nonempty ? double(hits) / nonempty : 0.0;
}

std::vector<std::uint8_t> base32_domain_mask(const FundamentalDomain& dom) {
  std::vector<std::uint8_t> mask(32 * 32, 0);
  const int K = 16;
  for (int iy = 0; iy < 32; ++iy) {
    for (int ix = 0; ix < 32; ++ix) {
      int inside = 0;
      for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) {
          const double x = dom.x0 + (dom.x1 - dom.x0) * (ix + (a + 0.5) / K) / 32.0;
          const double y = dom.y0 + (dom.y1 - dom.y0) * (iy + (b + 0.5) / K) / 32.0;
          if (dom.contains(cplx(x, y))) ++inside;
        }
      }
      mask[std::size_t(iy) * 32 + ix] = inside >= 8 ? 1 : 0;
    }
  }
  return mask;
}

int empty_base32_cells(const EmpiricalMeasure& m, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != m.base32.size())
    throw std::invalid_argument("empty_base32_cells: mask size mismatch");
  int empty = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && m.base32[i] <= 0) ++empty;
  return empty;
}

EmpiricalMeasure birkhoff_empirical(const FuchsianGroup& G, const Representation& rep,
                                    const SkewState& p, double T, double dt,
                                    bool reversed_record) {
  if (!(T > 0)) throw std::invalid_argument("birkhoff_empirical: T must be positive");
  const long n = long(T / dt + 1e-9);
  if (n < 1) throw std::invalid_argument("birkhoff_empirical: T < dt");
  EmpiricalMeasure m(GridSpec::for_domain(G.domain));
  evolve(G, rep, p, dt, n, [&](const SkewState& s) {
    m.add(reversed_record ? frame_reversed(s.frame) : s.frame, s.fiber, 1.0);
  });
  m.origin = OrbitSpec{p, T, dt, reversed_record, true};
  m.finish();
  return m;
}

EmpiricalMeasure unstable_arc_empirical(const FuchsianGroup& G,
                                        const Representation& rep, const Frame& g,
                                        double arc_len, int n_samples, double T,
                                        double dt, std::uint64_t seed) {
  if (n_samples < 1)
    throw std::invalid_argument("unstable_arc_empirical: n_samples must be >= 1");
  if (!(arc_len >= 0))
    throw std::invalid_argument("unstable_arc_empirical: arc_len must be >= 0");
  EmpiricalMeasure out(GridSpec::for_domain(G.domain));
  for (int j = 0; j < n_samples; ++j) {
    const double u = arc_len * ((j + 0.5) / n_samples - 0.5);
    const Frame f = u == 0.0 ? g : horocycle_advance(g, u, /*stable=*/false);
    Rng rng = Rng::stream(seed, std::uint64_t(j));
    SkewState s;
    s.frame = reduce(G, f).reduced;
    s.fiber = random_fiber(rng);
    EmpiricalMeasure mj = birkhoff_empirical(G, rep, s, T, dt);
    if (n_samples == 1) return mj;
    out.accumulate(mj, 1.0);
  }
  out.finish();
  return out;
}

namespace {
double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  return 0.5 * kernels::l1_fn()(a.data(), b.data(), a.size());
}
void check_comparable(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      const char* who) {
  if (!(a.grid == b.grid) || a.mass[0].size() != b.mass[0].size() ||
      a.mass[2].size() != b.mass[2].size())
    throw std::invalid_argument(std::string(who) + ": grid mismatch");
}
}  // namespace

double bl_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  check_comparable(a, b, "bl_distance");
  double d = 0;
  for (int s = 0; s < GridSpec::kScales; ++s) d += half_l1(a.mass[s], b.mass[s]);
  return d / GridSpec::kScales;
}

double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  check_comparable(a, b, "tv_distance");
  return half_l1(a.mass[2], b.mass[2]);
}

double invariance_defect(const FuchsianGroup& G, const Representation& rep,
                         const EmpiricalMeasure& m, double s) {
  if (!m.origin.valid)
    throw std::invalid_argument("invariance_defect: measure lacks a defining orbit");
  const double T = m.origin.T, dt = m.origin.dt;
  if (!(s > 0) || s > T / 10 + 1e-12)
    throw std::invalid_argument("invariance_defect: shift must lie in (0, T/10]");
  const long k = long(s / dt + 1e-9);
  if (k < 1) throw std::invalid_argument("invariance_defect: shift below dt");
  const long n = long(T / dt + 1e-9);
  EmpiricalMeasure shifted(m.grid);
  long step = 0;
  evolve(G, rep, m.origin.initial, dt, n + k, [&](const SkewState& st) {
    if (++step > k)
      shifted.add(m.origin.reversed_record ? frame_reversed(st.frame) : st.frame,
                  st.fiber, 1.0);
  });
  shifted.finish();
  return tv_distance(m, shifted);
}

AttractorSet classify_attractors(const std::vector<EmpiricalMeasure>& ms, double eps) {
  const int n = int(ms.size());
  if (n == 0) throw std::invalid_argument("classify_attractors: no measures");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bl_distance(ms[i], ms[j]) <= eps) parent[find(i)] = find(j);

  AttractorSet out;
  out.eps = eps;
  out.labels.assign(n, -1);
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    int id = -1;
    for (std::size_t k = 0; k < roots.size(); ++k)
      if (roots[k] == r) id = int(k);
    if (id < 0) {
      id = int(roots.size());
      roots.push_back(r);
    }
    out.labels[i] = id;
  }
  for (std::size_t c = 0; c < roots.size(); ++c) {
    EmpiricalMeasure rep(ms[0].grid);
    for (int i = 0; i < n; ++i)
      if (out.labels[i] == int(c)) rep.accumulate(ms[i], 1.0);
    rep.finish();
    out.representatives.push_back(std::move(rep));
  }
  out.min_rep_separation = 0;
  for (std::size_t a = 0; a < out.representatives.size(); ++a)
    for (std::size_t b = a + 1; b < out.representatives.size(); ++b) {
      const double d = bl_distance(out.representatives[a], out.representatives[b]);
      if (out.min_rep_separation == 0 || d < out.min_rep_separation)
        out.min_rep_separation = d;
    }
  return out;
}

VisibilityEstimate visibility(const FuchsianGroup& G, const Representation& rep,
                              const AttractorSet& attractors, cplx x, int n_dirs,
                              double T, double dt, std::uint64_t seed, int workers) {
  if (n_dirs < 1) throw std::invalid_argument("visibility: n_dirs must be >= 1");
  if (attractors.representatives.empty())
    throw std::invalid_argument("visibility: no attractor representatives");
  const int R = int(attractors.representatives.size());
  VisibilityEstimate out;
  out.x = x;
  out.n_dirs = n_dirs;
  out.counts.assign(R, 0);
  int unlabeled = 0;
  ordered_map_fold<int>(
      std::size_t(n_dirs), resolve_workers(workers),
      [&](std::size_t j) -> int {
        const double th = 2.0 * M_PI * (double(j) + 0.5) / n_dirs;
        Rng rng = Rng::stream(seed, j);
        SkewState s;
        s.frame = reduce(G, frame_from(x, th)).reduced;
        s.fiber = random_fiber(rng);
        const EmpiricalMeasure mj = birkhoff_empirical(G, rep, s, T, dt);
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int r = 0; r < R; ++r) {
          const double d = bl_distance(mj, attractors.representatives[r]);
          if (d < bd) {
            bd = d;
            best = r;
          }
        }
        return bd <= attractors.eps ? best : -1;
      },
      [&](std::size_t, int& lab) {
        if (lab >= 0)
          ++out.counts[lab];
        else
          ++unlabeled;
      });
  const int labeled = n_dirs - unlabeled;
  out.unlabeled_fraction = double(unlabeled) / n_dirs;
  out.f.assign(R, 0.0);
  out.half_width.assign(R, 0.0);
  if (labeled > 0) {
    for (int r = 0; r < R; ++r) {
      const double f = double(out.counts[r]) / labeled;
      out.f[r] = f;
      out.half_width[r] = 1.959963984540054 * std::sqrt(f * (1.0 - f) / labeled);
    }
  }
  return out;
}

ReversalComparison compare_time_reversal(const FuchsianGroup& G,
                                         const Representation& rep, double T,
                                         double dt, int N, std::uint64_t seed,
                                         int workers) {
  if (N < 1) throw std::invalid_argument("compare_time_reversal: N must be >= 1");
  using PairM = std::pair<EmpiricalMeasure, EmpiricalMeasure>;
  ReversalComparison out;
  const GridSpec gs = GridSpec::for_domain(G.domain);
  out.mu_plus = EmpiricalMeasure(gs);
  out.mu_minus = EmpiricalMeasure(gs);
  ordered_map_fold<PairM>(
      std::size_t(N), resolve_workers(workers),
      [&](std::size_t i) -> PairM {
        Rng rng = Rng::stream(seed, i);
        const SkewState s0 = random_state(G, rng);
        return PairM{birkhoff_empirical(G, rep, s0, T, dt, false),
                     birkhoff_empirical(G, rep, time_reversed(s0), T, dt, true)};
      },
      [&](std::size_t, PairM& p) {
        out.mu_plus.accumulate(p.first, 1.0);
        out.mu_minus.accumulate(p.second, 1.0);
      });
  out.mu_plus.finish();
  out.mu_minus.finish();
  out.tv = tv_distance(out.mu_plus, out.mu_minus);
  out.plus_near_bwd = out.mu_plus.endpoint_concentration(true);
  out.plus_near_fwd = out.mu_plus.endpoint_concentration(false);
  out.minus_near_bwd = out.mu_minus.endpoint_concentration(true);
  out.minus_near_fwd = out.mu_minus.endpoint_concentration(false);
  return out;
}

}  // namespace folia
