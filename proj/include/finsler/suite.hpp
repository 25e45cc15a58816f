#pragma once

// Identity checks per metric, aggregated into a report for the CLI.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

enum class CheckStatus { pass, fail, skipped };
std::string to_string(CheckStatus s);

struct CheckResult {
  std::string id;
  std::string anchor;  // the identity being checked, in words
  CheckStatus status = CheckStatus::pass;
  double value = 0.0;  // measured defect
  double tolerance = 0.0;
  double runtime_s = 0.0;
  std::string note;
};

struct SuiteReport {
  std::string metric;
  std::vector<CheckResult> checks;
  bool integrity_error = false;  // an oracle disagreed (exit code 3)

  int failures() const;
  bool ok() const { return failures() == 0; }
};

struct SuiteConfig {
  int samples = 20;
  std::uint64_t seed = 1;
  long long mc_samples = 1000000;
  std::map<std::string, double> tolerances;  // per check id, replaces the default
};

// Runs the structural checks on every metric plus the closed-form constants
// that apply to the metric's family (Funk, Hilbert, sphere, ...).
SuiteReport run_verify(const FinslerMetric& metric, const SuiteConfig& cfg = {});

}  // namespace finsler
