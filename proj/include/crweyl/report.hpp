#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crweyl {

// One named residual check. For identity checks the residual is the max
// deviation over samples; positivity checks report the violation magnitude
// (zero when satisfied) with tolerance zero.
struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  void add(const std::string& name, double residual, double tolerance) {
    checks.push_back({name, residual, tolerance, residual <= tolerance});
  }

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct SuiteReport {
  std::string suite;
  std::string example;
  std::string params;
  std::uint64_t seed = 0;
  int samples = 0;
  ValidationReport report;
  bool pass = false;
  double seconds = 0.0;
};

}  // namespace crweyl
