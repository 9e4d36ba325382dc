#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fcurve/dynamics.hpp"

namespace fcurve {

struct RunSettings {
  double horizon = 1.0;
  double dt = 0.0;  // 0 means one grid cell
  std::size_t paths = 1000;
  std::vector<double> forwards{1.0, 2.0, 3.0};
  std::size_t surface_paths = 2;
  std::size_t x_stride = 25;
  std::size_t t_stride = 25;
  unsigned threads = 1;
};

struct CorrSettings {
  std::vector<double> xs;
  std::vector<double> ys;
};

struct BasisSettings {
  double x0 = 2.0;
  std::optional<double> lambda;
  int n_max = 8;
};

enum class Mode { Physical, RiskNeutral };

// A fully resolved simulation setup.
struct Scenario {
  std::string name;
  Space space;
  ModelSpec model;
  RunSettings run;
  CorrSettings corr;
  BasisSettings basis;
  std::string volatility_kind;  // identity | kernel | state
  std::string kernel_spec;      // for kernel volatility
  double sigma = 1.0;

  void set_seed(std::uint64_t seed) { model.driver.seed = seed; }
  void set_mode(Mode m);
};

// Structured text (YAML block or flow style, which includes JSON).
Scenario parse_scenario(const std::string& text, const std::string& origin = "<config>");
Scenario load_scenario_file(const std::string& path);
// "lucia-schwartz-1f"
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenarios();
// "builtin:<name>" or a path
Scenario resolve_scenario(const std::string& ref);

}  // namespace fcurve
