#include "folia/harmonic.hpp"

#include <cmath>
#include <stdexcept>

#include "folia/kernels.hpp"
#include "folia/parallel.hpp"

namespace folia {

BrownianState brownian_advance_noise(const FuchsianGroup& G,
                                     const Representation& rep, BrownianState s,
                                     double dt, double xi1, double xi2) {
  if (!(dt > 0) || dt > 1e-2)
    throw std::invalid_argument("brownian_advance: dt must lie in (0, 1e-2]");
  const double y = s.position.imag();
  const double sq = std::sqrt(2.0 * dt);
  cplx z(s.position.real() + y * sq * xi1, y * std::exp(sq * xi2));
  if (!G.domain.contains(z)) {
    Frame f = reduce_visit(G, frame_from(z, 0.0), 1000000, [&](int k) {
      const MoebiusC h = rep.letter_image(G.side_elem_letter[k]);
      s.log_deriv += std::log(spherical_derivative(h, s.fiber));
      s.fiber = mobius_apply(h, s.fiber);
    });
    z = frame_base_point(f);
  }
  s.position = z;
  s.time += dt;
  return s;
}

BrownianState brownian_advance(const FuchsianGroup& G, const Representation& rep,
                               const BrownianState& s, double dt, Rng& rng) {
  const double xi1 = rng.normal();
  // Shifting the injected variate by -sqrt(dt/2) turns the pathwise
  // multiplicative map into the exact log-normal solution of the Ito equation
  // dy = sqrt(2) y dW (whose exponent carries the -dt compensator).
  const double xi2 = rng.normal() - std::sqrt(0.5 * dt);
  return brownian_advance_noise(G, rep, s, dt, xi1, xi2);
}

namespace {

BrownianState random_brownian_state(const FuchsianGroup& G, Rng& rng) {
  BrownianState b;
  b.position = G.domain.sample_point(rng);
  b.fiber = random_fiber(rng);
  return b;
}

}  // namespace

ExponentEstimate brownian_lyapunov(const FuchsianGroup& G, const Representation& rep,
                                   std::uint64_t seed, double T, double dt, int N,
                                   int workers) {
  if (!(T >= 100)) throw std::invalid_argument("brownian_lyapunov: T must be >= 100");
  if (!(dt > 0) || dt > 1e-2)
    throw std::invalid_argument("brownian_lyapunov: dt must lie in (0, 1e-2]");
  if (N < 1) throw std::invalid_argument("brownian_lyapunov: N must be >= 1");
  const long n_steps = long(T / dt + 0.5);
  ExponentEstimate est;
  est.T = T;
  est.dt = dt;
  est.N = N;
  est.per_orbit.reserve(N);
  ordered_map_fold<double>(
      std::size_t(N), resolve_workers(workers),
      [&](std::size_t i) -> double {
        Rng rng = Rng::stream(seed, i);
        BrownianState b = random_brownian_state(G, rng);
        for (long k = 0; k < n_steps; ++k) b = brownian_advance(G, rep, b, dt, rng);
        return b.log_deriv / (double(n_steps) * dt);
      },
      [&](std::size_t, double& v) { est.per_orbit.push_back(v); });
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

std::vector<double> brownian_base_occupation(const FuchsianGroup& G,
                                             const Representation& rep,
                                             std::uint64_t seed, double T, double dt,
                                             int N, int workers) {
  if (!(T > 0)) throw std::invalid_argument("brownian_base_occupation: T must be > 0");
  if (!(dt > 0) || dt > 1e-2)
    throw std::invalid_argument("brownian_base_occupation: dt must lie in (0, 1e-2]");
  if (N < 1) throw std::invalid_argument("brownian_base_occupation: N must be >= 1");
  const long n_steps = long(T / dt + 1e-9);
  const FundamentalDomain& dom = G.domain;
  const auto bin = [](double u) {
    const int i = int(u * 32);
    return i < 0 ? 0 : (i > 31 ? 31 : i);
  };
  std::vector<double> hist(32 * 32, 0.0);
  ordered_map_fold<std::vector<double>>(
      std::size_t(N), resolve_workers(workers),
      [&](std::size_t i) -> std::vector<double> {
        Rng rng = Rng::stream(seed, i);
        BrownianState b = random_brownian_state(G, rng);
        std::vector<double> h(32 * 32, 0.0);
        for (long k = 0; k < n_steps; ++k) {
          b = brownian_advance(G, rep, b, dt, rng);
          const int ix = bin((b.position.real() - dom.x0) / (dom.x1 - dom.x0));
          const int iy = bin((b.position.imag() - dom.y0) / (dom.y1 - dom.y0));
          h[std::size_t(iy) * 32 + ix] += 1.0;
        }
        return h;
      },
      [&](std::size_t, std::vector<double>& h) {
        for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += h[k];
      });
  double sum = 0;
  for (double v : hist) sum += v;
  if (sum > 0)
    for (double& v : hist) v /= sum;
  return hist;
}

double poisson_kernel(cplx x, double xi) {
  const double r2 = std::norm(x);
  if (r2 >= 1.0) throw std::domain_error("poisson_kernel: point outside the open disk");
  const cplx b(std::cos(xi), std::sin(xi));
  return (1.0 - r2) / std::norm(x - b);
}

CandelReport candel_identity_residual(const CandelParams& p) {
  if (p.grid_n < 64)
    throw std::invalid_argument("candel_identity_residual: grid must be >= 64");
  if (p.boundary_nodes < 1)
    throw std::invalid_argument("candel_identity_residual: need boundary nodes");
  if (!(p.margin > 0) || p.margin >= 0.9)
    throw std::invalid_argument("candel_identity_residual: margin must lie in (0, 0.9)");
  const int n = p.grid_n;
  const double dx = 2.0 / n;

  DiskField h = make_disk_field(n, p.margin, [&](double x, double y) {
    if (p.h_kind == CandelParams::uniform) return 1.0;
    return poisson_kernel(cplx(x, y), p.xi0);
  });
  DiskField logh = h;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    if (!h.mask[i]) continue;
    if (!(h.values[i] > 0) || !std::isfinite(h.values[i]))
      throw std::runtime_error("candel_identity_residual: h not positive on mask");
    logh.values[i] = std::log(h.values[i]);
  }

  // ksi quadrature nodes: the point mass is a single atom of weight one, the
  // uniform measure gets equally weighted midpoints (exact for trig series).
  std::vector<double> bx, by;
  double w_xi = 1.0;
  if (p.h_kind == CandelParams::point_mass) {
    bx.push_back(std::cos(p.xi0));
    by.push_back(std::sin(p.xi0));
  } else {
    bx.reserve(p.boundary_nodes);
    by.reserve(p.boundary_nodes);
    for (int b = 0; b < p.boundary_nodes; ++b) {
      const double t = 2.0 * M_PI * (b + 0.5) / p.boundary_nodes;
      bx.push_back(std::cos(t));
      by.push_back(std::sin(t));
    }
    w_xi = 1.0 / p.boundary_nodes;
  }

  const auto interior = [&](int ix, int iy) {
    if (ix < 1 || iy < 1 || ix > n - 2 || iy > n - 2) return false;
    const std::size_t i = std::size_t(iy) * n + ix;
    return h.mask[i] && h.mask[i - 1] && h.mask[i + 1] && h.mask[i - n] &&
           h.mask[i + n];
  };

  const auto row_fn = kernels::candel_row_fn();
  struct RowSums {
    double lhs = 0, rhs = 0;
  };
  double lhs = 0, rhs = 0;
  ordered_map_fold<RowSums>(
      std::size_t(n), std::size_t(resolve_workers(p.workers)),
      [&](std::size_t row) -> RowSums {
        const int iy = int(row);
        RowSums rs;
        for (int ix = 0; ix < n; ++ix) {
          if (!interior(ix, iy)) continue;
          const double x = h.node(ix), y = h.node(iy);
          rs.lhs += w_xi * row_fn(x, y, p.gx, p.gy, bx.data(), by.data(), bx.size());
          const double dlx = (logh.at(ix + 1, iy) - logh.at(ix - 1, iy)) / (2 * dx);
          const double dly = (logh.at(ix, iy + 1) - logh.at(ix, iy - 1)) / (2 * dx);
          rs.rhs += (dlx * p.gx + dly * p.gy) * h.at(ix, iy);
        }
        return rs;
      },
      [&](std::size_t, RowSums& rs) {
        lhs += rs.lhs;
        rhs += rs.rhs;
      });
  lhs *= dx * dx;
  rhs *= dx * dx;

  CandelReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.residual = std::fabs(lhs - rhs) / (1.0 + std::fabs(rhs));
  rep.grid = n;
  rep.boundary_nodes = p.boundary_nodes;
  return rep;
}

}  // namespace folia
