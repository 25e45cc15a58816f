#pragma once

// finsler_cli: subcommands verify / curvature / geodesic / volume / compare.
// Kept in a library so the tests can drive it without spawning processes.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/metric.hpp"

namespace finsler::cli {

enum ExitCode : int { ok = 0, check_failure = 1, usage_error = 2, integrity_error = 3 };

struct RunConfig {
  std::string command;
  std::string metric;
  std::optional<int> dim;  // defaults to 2 (3 for berwald_product)
  ParamMap params;
  std::string domain = "ball";
  int samples = 20;
  std::uint64_t seed = 1;
  long long mc_samples = 1000000;
  int jobs = 1;
  std::map<std::string, double> tolerances;
  std::string output_dir;  // empty: $FINSLER_OUTPUT_DIR, else "."

  // geodesic
  std::vector<double> from, dir;
  double t = 1.0;
  double dt = 0.05;

  // volume / compare
  std::vector<double> radii;
  std::optional<std::string> source;
  std::vector<double> center;
  int angles = 720;
  int polar_z = 16;
  std::optional<double> lambda, delta;
  std::vector<double> conjugate_dir;

  int resolved_dim() const;
};

// Throws ConfigurationError on unknown keys or wrong types.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

std::string default_output_dir();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace finsler::cli
