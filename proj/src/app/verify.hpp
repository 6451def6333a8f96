#pragma once

// Verification suites: each check computes one quantity and compares it
// with its tolerance. Checks carry the number of the acceptance criterion
// they decide (0 for supporting checks).

#include <iosfwd>
#include <string>
#include <vector>

namespace flashsim::app {

struct Check {
  std::string suite;
  std::string name;
  int criterion = 0;
  double value = 0;
  double tolerance = 0;
  std::string relation;  // how value is compared: "<=", ">", "in"
  bool passed = false;
  double seconds = 0;
  std::string detail;
};

struct VerifyOptions {
  unsigned threads = 1;
  double tolerance_scale = 1.0;  // multiplies upper-bound tolerances
};

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for unknown suites.
std::vector<Check> run_suite(const std::string& suite, const VerifyOptions& opt);
void print_checks(std::ostream& out, const std::vector<Check>& checks);

}  // namespace flashsim::app
