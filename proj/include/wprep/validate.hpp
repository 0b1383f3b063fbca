#pragma once

// Physics invariant suite behind the `validate` subcommand.

#include <iosfwd>
#include <string>
#include <vector>

#include "wprep/config.hpp"

namespace wprep {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity (see detail)
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

// Runs every check on the device described by cfg (its b, crosstalk ratio
// and lifetimes). Checks that throw are reported as failures.
std::vector<CheckResult> run_invariant_suite(const RunConfig& cfg);

// One aligned line per check plus a summary; returns true when all pass.
bool print_check_report(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace wprep
