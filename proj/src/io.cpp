#include "folia/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace folia {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json cells_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.push_back(json::array({i, v[i]}));
  return out;
}

void cells_from_json(const json& j, std::vector<double>& v, const char* who) {
  for (const json& cell : j) {
    if (!cell.is_array() || cell.size() != 2)
      throw ConfigError("E_SCHEMA: " + std::string(who) + ": malformed cell entry");
    const std::size_t idx = cell[0].get<std::size_t>();
    if (idx >= v.size())
      throw ConfigError("E_SCHEMA: " + std::string(who) + ": cell index out of range");
    v[idx] = cell[1].get<double>();
  }
}

const std::array<int, 8> kRelatorLetters = {1, 2, -1, -2, 3, 4, -3, -4};

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_digest(const json& resolved) {
  const std::string s = resolved.dump();
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(s.data(), s.size()));
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move " + tmp + " to " + path);
}

json load_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("E_SCHEMA: cannot read config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("E_SCHEMA: invalid JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("E_SCHEMA: config root must be an object: " + path);
  return j;
}

void set_dotted(json& cfg, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("E_SCHEMA: --set expects dotted.path=value, got: " + spec);
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (...) {
    value = raw;  // unquoted strings stay strings
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("E_SCHEMA: --set has an empty path segment: " + spec);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      throw ConfigError("E_SCHEMA: --set path crosses a non-object field: " + path);
    start = dot + 1;
  }
}

json group_to_json(const FuchsianGroup& G) {
  json gens = json::array();
  for (const Frame& g : G.generators)
    gens.push_back(json::array(
        {json::array({g.a, g.b}), json::array({g.c, g.d})}));
  return json{{"generators", gens}, {"pairing", G.domain.pairing}, {"preset", G.name}};
}

FuchsianGroup group_from_json(const json& j, bool require_pass) {
  std::string preset;
  if (j.is_string()) {
    preset = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("preset"))
      throw ConfigError(
          "E_SCHEMA: group: custom domains are not reconstructible; supply a preset name");
    preset = j.at("preset").get<std::string>();
  } else {
    throw ConfigError("E_SCHEMA: group must be a preset name or an exported group object");
  }

  FuchsianGroup G;
  if (preset == "genus2")
    G = preset_genus2();
  else if (preset == "punctured-torus")
    G = preset_punctured_torus();
  else
    throw ConfigError("E_SCHEMA: unknown group preset: " + preset);

  if (j.is_object() && j.contains("generators")) {
    const json& gens = j.at("generators");
    if (gens.size() != G.generators.size())
      throw ConfigError("E_SCHEMA: group: generator count does not match the preset");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const Frame imported{gens[i][0][0].get<double>(), gens[i][0][1].get<double>(),
                           gens[i][1][0].get<double>(), gens[i][1][1].get<double>()};
      if (frame_dist(imported, G.generators[i]) > 1e-9)
        throw ConfigError("E_SCHEMA: group: imported generators differ from the preset");
    }
  }
  if (j.is_object() && j.contains("pairing") &&
      j.at("pairing") != json(G.domain.pairing))
    throw ConfigError("E_SCHEMA: group: imported pairing differs from the preset");

  const GroupVerification v = verify_group(G);
  if (require_pass && !v.pass)
    throw ConfigError("E_GROUP_VERIFY: group verification failed: relator residual " +
                      std::to_string(v.relator_residual));
  return G;
}

json representation_to_json(const Representation& rep) {
  json images = json::array();
  for (const MoebiusC& m : rep.images) {
    images.push_back(json::array({json::array({m.a.real(), m.a.imag()}),
                                  json::array({m.b.real(), m.b.imag()}),
                                  json::array({m.c.real(), m.c.imag()}),
                                  json::array({m.d.real(), m.d.imag()})}));
  }
  return json{{"images", images}, {"tag", rep.tag}};
}

Representation representation_from_json(const json& j, const FuchsianGroup& G) {
  if (j.is_string()) {
    try {
      return rep_preset(G, j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("E_SCHEMA: ") + e.what());
    }
  }
  if (!j.is_object() || !j.contains("images"))
    throw ConfigError("E_SCHEMA: rep must be a preset name or {images, tag}");
  const json& images = j.at("images");
  if (images.size() != G.generators.size())
    throw ConfigError("E_SCHEMA: rep: image count must match the generator count");
  Representation rep;
  rep.tag = j.value("tag", "custom");
  for (const json& m : images) {
    if (!m.is_array() || m.size() != 4)
      throw ConfigError("E_SCHEMA: rep: each image needs 4 complex entries [a,b,c,d]");
    const auto entry = [&](int k) {
      return cplx(m[k][0].get<double>(), m[k][1].get<double>());
    };
    MoebiusC mb{entry(0), entry(1), entry(2), entry(3)};
    if (std::abs(mb.det()) < 1e-12)
      throw ConfigError("E_SCHEMA: rep: singular image matrix");
    rep.images.push_back(mb.normalized());
  }
  if (G.compact) {
    // the flat bundle needs the surface-group relation to hold projectively
    MoebiusC r;
    for (int letter : kRelatorLetters) r = r * rep.letter_image(letter);
    r = r.normalized();
    const double to_id = std::abs(r.a - 1.0) + std::abs(r.b) + std::abs(r.c) +
                         std::abs(r.d - 1.0);
    const double to_mid = std::abs(r.a + 1.0) + std::abs(r.b) + std::abs(r.c) +
                          std::abs(r.d + 1.0);
    if (std::min(to_id, to_mid) > 1e-6)
      throw ConfigError("E_REP_VERIFY: rep: images do not respect the surface-group relation");
  }
  return rep;
}

json measure_to_json(const EmpiricalMeasure& m) {
  json grid{{"x0", m.grid.x0},
            {"x1", m.grid.x1},
            {"y0", m.grid.y0},
            {"y1", m.grid.y1},
            {"position", json::array({json::array({4, 2}), json::array({4, 4}),
                                      json::array({8, 4})})},
            {"direction", json::array({8, 16, 32})},
            {"fiber", json::array({8, 16, 32})}};
  return json{{"gridspec", grid},
              {"cells", cells_to_json(m.mass[2])},
              {"cells_mid", cells_to_json(m.mass[1])},
              {"cells_coarse", cells_to_json(m.mass[0])},
              {"base32", cells_to_json(m.base32)}};
}

EmpiricalMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("gridspec") || !j.contains("cells"))
    throw ConfigError("E_SCHEMA: measure: expected {gridspec, cells, ...}");
  const json& g = j.at("gridspec");
  GridSpec spec;
  spec.x0 = g.at("x0").get<double>();
  spec.x1 = g.at("x1").get<double>();
  spec.y0 = g.at("y0").get<double>();
  spec.y1 = g.at("y1").get<double>();
  EmpiricalMeasure m(spec);
  cells_from_json(j.at("cells"), m.mass[2], "measure.cells");
  if (j.contains("cells_mid")) cells_from_json(j.at("cells_mid"), m.mass[1], "measure.cells_mid");
  if (j.contains("cells_coarse"))
    cells_from_json(j.at("cells_coarse"), m.mass[0], "measure.cells_coarse");
  if (j.contains("base32")) cells_from_json(j.at("base32"), m.base32, "measure.base32");
  m.total = 1.0;
  return m;
}

std::string measure_to_csv(const EmpiricalMeasure& m) {
  std::ostringstream out;
  out << "scale,index,mass\n";
  for (int s = 0; s < GridSpec::kScales; ++s)
    for (std::size_t i = 0; i < m.mass[s].size(); ++i)
      if (m.mass[s][i] != 0.0)
        out << s << ',' << i << ',' << fmt17(m.mass[s][i]) << '\n';
  return out.str();
}

std::string measure_svg_fiber_heatmap(const EmpiricalMeasure& m) {
  double peak = 0;
  for (double v : m.fiber32) peak = std::max(peak, v);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" "
         "viewBox=\"0 0 800 400\">\n";
  for (int i = 0; i < 32; ++i) {
    const double v = m.fiber32[std::size_t(i)];
    if (v <= 0) continue;
    const int col = i % 8, row = i / 8;
    const int shade = int(255.0 * (1.0 - v / peak) + 0.5);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"100\" height=\"100\" "
                  "fill=\"rgb(%d,%d,255)\"/>\n",
                  col * 100, row * 100, shade, shade);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

namespace {
void trajectory_row(std::ostringstream& out, double t, cplx z, double angle,
                    const SpherePoint& fiber, double log_deriv, const char* kind) {
  const cplx f = fiber.affine();
  out << fmt17(t) << ',' << fmt17(z.real()) << ',' << fmt17(z.imag()) << ','
      << fmt17(angle) << ',' << fmt17(f.real()) << ',' << fmt17(f.imag()) << ','
      << fmt17(log_deriv) << ',' << kind << '\n';
}
constexpr const char* kTrajectoryHeader =
    "t,x,y,angle,fiber_affine_re,fiber_affine_im,log_deriv,path_type\n";
}  // namespace

std::string trajectory_csv(const FuchsianGroup& G, const Representation& rep,
                           const SkewState& start, double T, double dt) {
  const long n = long(T / dt + 1e-9);
  if (n < 1) throw ConfigError("E_PRECONDITION: trajectory: \"T\" must be at least dt");
  std::ostringstream out;
  out << kTrajectoryHeader;
  evolve(G, rep, start, dt, n, [&](const SkewState& s) {
    trajectory_row(out, s.time, frame_base_point(s.frame),
                   frame_direction(s.frame), s.fiber, s.log_deriv, "geodesic");
  });
  return out.str();
}

std::string brownian_trajectory_csv(const FuchsianGroup& G, const Representation& rep,
                                    std::uint64_t seed, double T, double dt) {
  const long n = long(T / dt + 1e-9);
  if (n < 1) throw ConfigError("E_PRECONDITION: trajectory: \"T\" must be at least dt");
  Rng rng = Rng::stream(seed, 0);
  BrownianState b;
  b.position = G.domain.sample_point(rng);
  b.fiber = random_fiber(rng);
  std::ostringstream out;
  out << kTrajectoryHeader;
  for (long k = 0; k < n; ++k) {
    b = brownian_advance(G, rep, b, dt, rng);
    trajectory_row(out, b.time, b.position, 0.0, b.fiber, b.log_deriv, "brownian");
  }
  return out.str();
}

}  // namespace folia
