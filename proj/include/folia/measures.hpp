#pragma once
#include <cstdint>
#include <vector>

#include "folia/cocycle.hpp"

namespace folia {

// Histogram layout shared by every measure in a comparison: a fixed 3-scale
// product partition of base-position x direction x fiber. Positions use
// rectangles over the domain's bounding box, directions uniform arcs, fiber
// cells an equal-area octant partition refined dyadically (see fiber_cell).
struct GridSpec {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  static constexpr int kScales = 3;
  static constexpr int nx[3] = {4, 4, 8};
  static constexpr int ny[3] = {2, 4, 4};
  static constexpr int nd[3] = {8, 16, 32};
  static constexpr int nf[3] = {8, 16, 32};

  static GridSpec for_domain(const FundamentalDomain& dom);
  int joint_cells(int s) const { return nx[s] * ny[s] * nd[s] * nf[s]; }
  int base_cells(int s) const { return nx[s] * ny[s] * nd[s]; }
  bool operator==(const GridSpec& o) const {
    return x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1;
  }
};

// Equal-area sphere cells: 8 octants; refined by the |Z| = 1/2 band (equal
// area by the cylindrical projection); refined again by |Y| >= |X| (equal
// longitude span). Counts 8, 16, 32 at scales 0, 1, 2.
int fiber_cell(int scale, double x, double y, double z);
int fiber_cell(int scale, const SpherePoint& v);
const SpherePoint& fiber_cell_center(int scale, int idx);

// Provenance of a single-orbit measure, kept so invariance can be probed by
// re-simulating the same orbit over a shifted window.
struct OrbitSpec {
  SkewState initial;
  double T = 0, dt = 0;
  bool reversed_record = false;
  bool valid = false;
};

struct EmpiricalMeasure {
  GridSpec grid;
  std::vector<double> mass[GridSpec::kScales];  // joint histograms per scale
  std::vector<double> base32;                   // 32x32 position marginal
  std::vector<double> fiber32;                  // finest fiber marginal
  // Per finest-scale base cell: total mass, and the part whose fiber lies in
  // the two nearest fiber cells of each geodesic endpoint of the sample frame
  // (backward endpoint = attracting section of the frame's forward flow).
  std::vector<double> cell_mass, cell_near_bwd, cell_near_fwd;
  double total = 0;
  OrbitSpec origin;

  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(const GridSpec& g);

  void add(const Frame& reduced, const SpherePoint& fiber, double w);
  void accumulate(const EmpiricalMeasure& o, double w);
  void finish();  // scales total mass to exactly 1
  bool mass_ok(double tol = 1e-12) const;

  // Fraction of nonempty finest-scale base cells whose conditional fiber mass
  // within the two endpoint-nearest cells is at least 1/2.
  double endpoint_concentration(bool backward) const;
};

// Which 32x32 bounding-box cells meet the fundamental domain: a cell counts
// when at least 8 of a 16x16 probe grid land inside (thinner slivers cannot
// be populated reliably in finite time). Used by the positivity check.
std::vector<std::uint8_t> base32_domain_mask(const FundamentalDomain& dom);
int empty_base32_cells(const EmpiricalMeasure& m,
                       const std::vector<std::uint8_t>& mask);

EmpiricalMeasure birkhoff_empirical(const FuchsianGroup& G,
                                    const Representation& rep,
                                    const SkewState& p, double T, double dt,
                                    bool reversed_record = false);

EmpiricalMeasure unstable_arc_empirical(const FuchsianGroup& G,
                                        const Representation& rep,
                                        const Frame& g, double arc_len,
                                        int n_samples, double T, double dt,
                                        std::uint64_t seed);

// Multiscale histogram metric: average over scales of half the L1 distance.
double bl_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
// Half the L1 distance at the finest joint scale.
double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Re-simulates the defining orbit of m over [s, T+s] and returns the finest-
// scale total-variation to m. For a time average this is bounded by s/T plus
// rounding, with no grid slack (same orbit, same cells).
double invariance_defect(const FuchsianGroup& G, const Representation& rep,
                         const EmpiricalMeasure& m, double s);

struct AttractorSet {
  std::vector<EmpiricalMeasure> representatives;
  std::vector<int> labels;  // cluster id per input measure
  double eps = 0;
  double min_rep_separation = 0;  // 0 when there is a single cluster
};

AttractorSet classify_attractors(const std::vector<EmpiricalMeasure>& ms,
                                 double eps);

struct VisibilityEstimate {
  cplx x;
  int n_dirs = 0;
  std::vector<int> counts;        // labeled orbit counts per attractor
  std::vector<double> f;          // proportions over labeled directions
  std::vector<double> half_width; // 95% binomial half-widths
  double unlabeled_fraction = 0;
};

VisibilityEstimate visibility(const FuchsianGroup& G, const Representation& rep,
                              const AttractorSet& attractors, cplx x,
                              int n_dirs, double T, double dt,
                              std::uint64_t seed, int workers = 0);

struct ReversalComparison {
  double tv = 0;
  EmpiricalMeasure mu_plus, mu_minus;
  double plus_near_bwd = 0, plus_near_fwd = 0;    // endpoint concentrations
  double minus_near_bwd = 0, minus_near_fwd = 0;
};

// Forward and time-reversed ensembles from identical (seed-matched) starts.
// Backward samples are recorded re-reversed, so both measures live on the
// same bundle coordinates; tv compares the finest joint histograms.
ReversalComparison compare_time_reversal(const FuchsianGroup& G,
                                         const Representation& rep, double T,
                                         double dt, int N, std::uint64_t seed,
                                         int workers = 0);

}  // namespace folia
