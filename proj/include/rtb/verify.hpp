#pragma once

#include <string>
#include <vector>

#include "rtb/io.hpp"

namespace rtb {

struct CheckResult {
  std::string suite, name;
  bool pass = false;
  double value = 0, tolerance = 0;
  std::string detail;
};

// Suites: contour, trajectory, action, oracle, all. Unknown names raise DomainError.
const std::vector<std::string>& suite_names();
std::vector<CheckResult> run_suite(const std::string& name);
Json report(const std::vector<CheckResult>& checks);

}  // namespace rtb
