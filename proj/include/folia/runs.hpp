#pragma once

#include <string>
#include <vector>

#include "folia/io.hpp"

namespace folia {

// One executed command: the deterministic report payload, the volatile
// companion (wall clock, resolved worker count), and optional csv/svg
// renderings for --format.
struct RunOutcome {
  json report;
  json runinfo;
  int exit_code = 0;  // 0 pass, 1 a declared threshold failed
  std::string csv, svg;
  bool has_csv = false, has_svg = false;
};

const std::vector<std::string>& command_names();

// Validates cfg fully (unknown fields, types, preconditions) before any
// compute, then runs the command. Throws ConfigError on bad configs; other
// exceptions signal runtime failures. The report depends only on the resolved
// config: worker count and wall time live in runinfo.
RunOutcome run_command(const std::string& command, json cfg);

}  // namespace folia
