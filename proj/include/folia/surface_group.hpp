#pragma once
#include <functional>
#include <string>
#include <vector>

#include "folia/hyperbolic.hpp"
#include "folia/rng.hpp"

namespace folia {

// Holonomy word: letters are +-(k+1) for generator k, evaluated left to right.
struct Word {
  std::vector<int> letters;
  bool empty() const { return letters.empty(); }
  void append(const Word& o) {
    letters.insert(letters.end(), o.letters.begin(), o.letters.end());
  }
};

// One geodesic side of the fundamental polygon. The sign form
//   s(z) = orient * (A*(x^2+y^2) + B*x + C)
// is positive on the domain's side (A = -1 for semicircles, 0 for vertical
// lines). Arc endpoints may be ideal, in which case the boundary pair is used.
struct SideGeom {
  double A = 0, B = 1, C = 0;
  cplx v0{0, 0}, v1{0, 0};
  bool ideal0 = false, ideal1 = false;
  BoundaryPoint b0, b1;  // arc endpoints as boundary points when ideal

  double sign(cplx z) const {
    const double x = z.real(), y = z.imag();
    return A * (x * x + y * y) + B * x + C;
  }
};

struct FundamentalDomain {
  std::vector<SideGeom> sides;
  std::vector<int> pairing;  // involution on side indices
  cplx base_point{0, 1};
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // bounding box of the polygon
  std::vector<double> sa, sb, sc;         // sign-form coefficients, one per side

  void finalize();  // fills the coefficient arrays; call after editing sides

  // Half-open membership: a boundary point on side k belongs to the domain
  // iff k < pairing[k]. Deterministic for identical input bits.
  bool contains(cplx z) const;

  // Uniform w.r.t. hyperbolic area, by rejection from the bounding box.
  cplx sample_point(Rng& rng) const;
};

struct FuchsianGroup {
  std::vector<Frame> generators;      // one per letter (4 for genus 2, 2 for torus)
  std::vector<Frame> side_elems;      // side_elems[k] maps side k onto side pairing[k]
  std::vector<int> side_elem_letter;  // group letter of side_elems[k]
  FundamentalDomain domain;
  std::string name;
  bool compact = true;
  int chi_abs = 2;  // |Euler characteristic| of the quotient surface
  bool relator_is_parabolic = false;

  Frame letter_elem(int letter) const;
  Frame evaluate(const Word& w) const;
};

FuchsianGroup preset_genus2();
FuchsianGroup preset_punctured_torus();

struct ReduceResult {
  Frame reduced;
  Word word;  // reduced == evaluate(word)^{-1} * input
  int steps = 0;
};

// Greedy nearest-side reduction into the fundamental domain. Throws
// std::runtime_error if the step budget is exhausted.
ReduceResult reduce(const FuchsianGroup& G, const Frame& g, int budget = 1000000);

// Same reduction, invoking on_cross(side_index) after each move; the flow
// loop uses this to fold fiber holonomy per crossing.
Frame reduce_visit(const FuchsianGroup& G, Frame g, int budget,
                   const std::function<void(int)>& on_cross);

struct GroupVerification {
  double relator_residual = 0;  // ||R -+ I||_F, or ||trace|-2| for parabolic relators
  std::vector<double> side_residuals;
  double max_side_residual = 0;
  double area = 0;
  double area_defect = 0;  // |area - 2*pi*|chi||
  double min_abs_trace = 0;
  bool hyperbolic_generators = false;
  bool pass = false;
};

GroupVerification verify_group(const FuchsianGroup& G, double tol = 1e-9);

}  // namespace folia
