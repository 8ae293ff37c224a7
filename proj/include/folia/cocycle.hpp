#pragma once
#include <functional>
#include <string>
#include <vector>

#include "folia/hyperbolic.hpp"
#include "folia/parallel.hpp"
#include "folia/rng.hpp"
#include "folia/surface_group.hpp"

namespace folia {

// Transverse holonomy: one unit-determinant complex matrix per generator.
// The tag is metadata only.
struct Representation {
  std::vector<MoebiusC> images;
  std::string tag = "custom";

  MoebiusC letter_image(int letter) const;
  MoebiusC evaluate(const Word& w) const;
};

Representation rep_inclusion(const FuchsianGroup& G);
Representation rep_unitary(const FuchsianGroup& G);
Representation rep_trivial(const FuchsianGroup& G);
Representation rep_quasi_fuchsian(const FuchsianGroup& G);
// name in {inclusion|fuchsian, unitary, trivial, quasi-fuchsian[-like]}
Representation rep_preset(const FuchsianGroup& G, const std::string& name);

// One orbit of the foliated geodesic flow: domain-reduced frame, fiber point,
// accumulated log of the spherical holonomy derivative, elapsed time.
struct SkewState {
  Frame frame;
  SpherePoint fiber;
  double log_deriv = 0;
  double time = 0;
};

// Round-uniform point of the fiber sphere (Gaussian pair in C^2, projected).
SpherePoint random_fiber(Rng& rng);

// Liouville frame (uniform area x uniform direction) with a round-uniform fiber.
SkewState random_state(const FuchsianGroup& G, Rng& rng);

// Direction flip; base point, fiber, and accumulators unchanged.
SkewState time_reversed(const SkewState& s);

// Advance n_steps of size dt. Between domain crossings the fiber is constant
// (flat bundle); each crossing applies the matching holonomy image and adds
// its log spherical derivative. sink, if set, sees the state after each step.
SkewState evolve(const FuchsianGroup& G, const Representation& rep, SkewState s,
                 double dt, long n_steps,
                 const std::function<void(const SkewState&)>& sink = nullptr);

struct ExponentEstimate {
  double mean = 0;
  double stderr_ = 0;  // sample standard error of the per-orbit means
  std::vector<double> per_orbit;
  double T = 0, dt = 0;
  int N = 0;
  double ci95() const { return 1.959963984540054 * stderr_; }
};

// Mean of log_deriv/T over N independent Liouville starts. Deterministic in
// (seed, parameters); orbits run on per-index RNG streams and merge in index
// order regardless of worker count.
ExponentEstimate transverse_lyapunov(const FuchsianGroup& G,
                                     const Representation& rep,
                                     std::uint64_t seed, double T, double dt,
                                     int N, int workers = 0);

}  // namespace folia
