#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fcurve::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
  double seconds = 0.0;  // wall time; not part of the summary
};

struct SuiteOptions {
  std::uint64_t seed = 7;
  unsigned threads = 1;
  std::ostream* log = nullptr;
};

// Acceptance criteria 1 to 9 (criterion 10 is about reproducibility of the
// whole run and is checked by the caller).
std::vector<CriterionResult> run_suite(const SuiteOptions& opts);
CriterionResult run_criterion(int id, const SuiteOptions& opts);

// Deterministic JSON summary (no timings).
std::string summary_json(const std::vector<CriterionResult>& results, std::uint64_t seed);
std::string result_line(const CriterionResult& r);

}  // namespace fcurve::acceptance
