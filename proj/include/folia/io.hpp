#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "folia/harmonic.hpp"
#include "folia/measures.hpp"

namespace folia {

using json = nlohmann::json;

// Configuration problems (schema, unknown fields, precondition violations)
// map to exit code 2; everything else that throws maps to 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string config_digest(const json& resolved);

void write_text_atomic(const std::string& path, const std::string& text);
json load_json_file(const std::string& path);

// --set dotted.path=value; the value is parsed as JSON when well-formed,
// otherwise taken as a string.
void set_dotted(json& cfg, const std::string& spec);

json group_to_json(const FuchsianGroup& G);
FuchsianGroup group_from_json(const json& j, bool require_pass = true);
json representation_to_json(const Representation& rep);
Representation representation_from_json(const json& j, const FuchsianGroup& G);

json measure_to_json(const EmpiricalMeasure& m);
EmpiricalMeasure measure_from_json(const json& j);
std::string measure_to_csv(const EmpiricalMeasure& m);
// Fiber-marginal heatmap: 32 equal-area cells drawn as an 8x4 panel; only
// cells with positive mass are emitted.
std::string measure_svg_fiber_heatmap(const EmpiricalMeasure& m);

std::string trajectory_csv(const FuchsianGroup& G, const Representation& rep,
                           const SkewState& start, double T, double dt);
std::string brownian_trajectory_csv(const FuchsianGroup& G, const Representation& rep,
                                    std::uint64_t seed, double T, double dt);

}  // namespace folia
