#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "folia/runs.hpp"

int main(int argc, char** argv) {
  CLI::App app{"simulator for foliated geodesic and Brownian dynamics over "
               "hyperbolic surfaces"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "json";
  std::vector<std::string> sets;
  long long seed = -1;
  int threads = -1;

  for (const std::string& name : folia::command_names()) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "JSON config file");
    s->add_option("--set", sets, "override a config field: dotted.path=value");
    s->add_option("--out", out_path,
                  "write the report here (plus <out>.runinfo.json)");
    s->add_option("--format", format, "json | csv | svg");
    s->add_option("--seed", seed, "master seed (non-negative)");
    s->add_option("--threads", threads, "worker count (0 = THREADS env / auto)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // flag misuse is a config error
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    folia::json cfg = folia::json::object();
    if (!config_path.empty()) cfg = folia::load_json_file(config_path);
    for (const std::string& s : sets) folia::set_dotted(cfg, s);
    if (seed >= 0) cfg["seed"] = static_cast<unsigned long long>(seed);
    if (threads >= 0) cfg["threads"] = threads;
    if (format != "json" && format != "csv" && format != "svg")
      throw folia::ConfigError("E_SCHEMA: --format must be json, csv, or svg");

    folia::RunOutcome out = folia::run_command(command, cfg);

    std::string payload;
    if (format == "json") {
      payload = out.report.dump(2) + "\n";
    } else if (format == "csv") {
      if (!out.has_csv)
        throw folia::ConfigError("E_SCHEMA: " + command + " has no csv form");
      payload = out.csv;
    } else {
      if (!out.has_svg)
        throw folia::ConfigError("E_SCHEMA: " + command + " has no svg form");
      payload = out.svg;
    }

    if (!out_path.empty()) {
      folia::write_text_atomic(out_path, payload);
      folia::write_text_atomic(out_path + ".runinfo.json",
                               out.runinfo.dump(2) + "\n");
    } else {
      std::fwrite(payload.data(), 1, payload.size(), stdout);
      std::fprintf(stderr, "%s\n", out.runinfo.dump().c_str());
    }
    return out.exit_code;
  } catch (const folia::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}
