#include "fcurve/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fcurve/curve_io.hpp"
#include "fcurve/errors.hpp"

namespace fcurve {

namespace {

struct Ctx {
  std::string origin;
  std::filesystem::path base_dir;
};

std::string at(const Ctx& c, const YAML::Node& n, const std::string& path) {
  std::string s = c.origin;
  if (n.Mark().line >= 0) s += ":" + std::to_string(n.Mark().line + 1);
  return s + ": " + path;
}

void allow_keys(const Ctx& c, const YAML::Node& n, const std::string& path, std::set<std::string> keys) {
  if (!n.IsMap()) throw ConfigError(at(c, n, path) + ": expected a table");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) throw ConfigError(at(c, kv.first, path + "." + key) + ": unknown key");
  }
}

template <class T>
T read(const Ctx& c, const YAML::Node& n, const std::string& path) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(at(c, n, path) + ": wrong type");
  }
}

template <class T>
T get(const Ctx& c, const YAML::Node& parent, const std::string& key, const std::string& path, T fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  return read<T>(c, n, path + "." + key);
}

template <class T>
T need(const Ctx& c, const YAML::Node& parent, const std::string& key, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) throw ConfigError(at(c, parent, path) + ": missing key '" + key + "'");
  return read<T>(c, n, path + "." + key);
}

std::vector<double> numbers(const Ctx& c, const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(at(c, n, path) + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read<double>(c, n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

struct CurveSpec {
  Curve curve;
  double mu = 0.0;
  bool exponential = false;
  double level = 0.0;
  double rate = 0.0;
};

CurveSpec parse_curve(const Ctx& c, const YAML::Node& n, const std::string& path, const Space& s) {
  if (!n.IsMap()) throw ConfigError(at(c, n, path) + ": expected a curve table");
  const auto kind = need<std::string>(c, n, "kind", path);
  CurveSpec out;
  if (kind == "flat") {
    allow_keys(c, n, path, {"kind", "level", "mu"});
    out.curve = Curve::constant(s, need<double>(c, n, "level", path));
  } else if (kind == "exp") {
    allow_keys(c, n, path, {"kind", "level", "rate", "long", "mu"});
    const double level = need<double>(c, n, "level", path);
    const double rate = need<double>(c, n, "rate", path);
    const double lng = get<double>(c, n, "long", path, 0.0);
    out.curve = Curve::from_function(s, [=](double x) { return lng + (level - lng) * std::exp(-rate * x); });
    out.exponential = lng == 0.0;
    out.level = level;
    out.rate = rate;
  } else if (kind == "csv") {
    allow_keys(c, n, path, {"kind", "path", "mu"});
    std::filesystem::path p = need<std::string>(c, n, "path", path);
    if (p.is_relative()) p = c.base_dir / p;
    out.curve = read_curve_csv_file(p.string());
    if (out.curve.space() != s) throw ConfigError(at(c, n, path) + ": curve file grid differs from the configured space");
  } else if (kind == "carma") {
    allow_keys(c, n, path, {"kind", "ar", "ma", "scale", "mu"});
    const auto ar = numbers(c, n["ar"], path + ".ar");
    const auto ma = numbers(c, n["ma"], path + ".ma");
    out.curve = get<double>(c, n, "scale", path, 1.0) * carma_kernel(s, ar, ma);
  } else {
    throw ConfigError(at(c, n, path + ".kind") + ": unknown curve kind '" + kind + "'");
  }
  out.mu = get<double>(c, n, "mu", path, 0.0);
  return out;
}

std::function<double(double)> parse_sigma(const Ctx& c, const YAML::Node& n, const std::string& path, double* constant) {
  if (!n || n.IsNull()) {
    *constant = 1.0;
    return [](double) { return 1.0; };
  }
  if (n.IsScalar()) {
    const double v = read<double>(c, n, path);
    *constant = v;
    return [v](double) { return v; };
  }
  allow_keys(c, n, path, {"base", "amplitude", "period"});
  const double base = need<double>(c, n, "base", path);
  const double amp = get<double>(c, n, "amplitude", path, 0.0);
  const double period = get<double>(c, n, "period", path, 1.0);
  if (!(period > 0.0)) throw ConfigError(at(c, n, path + ".period") + ": must be positive");
  *constant = base;
  return [=](double t) { return base + amp * std::cos(2.0 * std::numbers::pi * t / period); };
}

Scenario build(const YAML::Node& root, const Ctx& c) {
  if (!root.IsMap()) throw ConfigError(c.origin + ": top level must be a table");
  allow_keys(c, root, "config", {"name", "space", "f0", "driver", "volatility", "run", "corr", "basis"});
  Scenario sc;
  sc.name = get<std::string>(c, root, "name", "config", "custom");

  WeightSpec ws;
  GridSpec gs;
  if (const YAML::Node sp = root["space"]) {
    allow_keys(c, sp, "space", {"alpha", "dx", "x_max"});
    ws.alpha = get<double>(c, sp, "alpha", "space", ws.alpha);
    gs.dx = get<double>(c, sp, "dx", "space", gs.dx);
    gs.x_max = get<double>(c, sp, "x_max", "space", gs.x_max);
  }
  sc.space = Space(ws, gs);

  if (!root["f0"]) throw ConfigError(c.origin + ": missing f0");
  sc.model.f0 = parse_curve(c, root["f0"], "f0", sc.space).curve;

  const YAML::Node drv = root["driver"];
  if (!drv) throw ConfigError(c.origin + ": missing driver");
  allow_keys(c, drv, "driver", {"kind", "ig_mu", "ig_lambda", "factors", "seed"});
  const auto kind = need<std::string>(c, drv, "kind", "driver");
  if (kind == "wiener") {
    sc.model.driver.kind = DriverKind::Wiener;
  } else if (kind == "nig") {
    sc.model.driver.kind = DriverKind::NIG;
  } else {
    throw ConfigError(at(c, drv["kind"], "driver.kind") + ": expected 'wiener' or 'nig'");
  }
  sc.model.driver.ig_mu = get<double>(c, drv, "ig_mu", "driver", 1.0);
  sc.model.driver.ig_lambda = get<double>(c, drv, "ig_lambda", "driver", 1.0);
  sc.model.driver.seed = get<std::uint64_t>(c, drv, "seed", "driver", 0);
  const YAML::Node fac = drv["factors"];
  if (!fac || !fac.IsSequence() || fac.size() == 0) throw ConfigError(at(c, drv, "driver.factors") + ": need a non-empty list");
  std::vector<Curve> factors;
  Curve beta(sc.space);
  bool any_mu = false;
  for (std::size_t i = 0; i < fac.size(); ++i) {
    const std::string p = "driver.factors[" + std::to_string(i) + "]";
    CurveSpec cs = parse_curve(c, fac[i], p, sc.space);
    if (cs.exponential && !(cs.rate > 0.5 * sc.space.alpha())) {
      throw SpecViolation(at(c, fac[i], p) + ": exponential factor rate " + format_double(cs.rate) + " must exceed alpha/2 = " + format_double(0.5 * sc.space.alpha()) + " for the factor to lie in the weighted space");
    }
    if (cs.mu != 0.0) {
      any_mu = true;
      beta.axpy(cs.mu, cs.curve);
    }
    factors.push_back(std::move(cs.curve));
  }
  sc.model.driver.covariance = std::make_shared<FactorCovariance>(sc.space, std::move(factors));
  if (any_mu) sc.model.beta = [beta](double) { return beta; };
  sc.model.driver.validate();

  const YAML::Node vol = root["volatility"];
  sc.volatility_kind = vol ? need<std::string>(c, vol, "kind", "volatility") : "identity";
  if (sc.volatility_kind == "identity") {
    if (vol) allow_keys(c, vol, "volatility", {"kind", "sigma"});
    auto sig = parse_sigma(c, vol ? vol["sigma"] : YAML::Node(), "volatility.sigma", &sc.sigma);
    sc.model.psi = ScalarPsi{sig, std::make_shared<IdentityOperator>(sc.space)};
  } else if (sc.volatility_kind == "kernel") {
    allow_keys(c, vol, "volatility", {"kind", "kernel", "sigma"});
    sc.kernel_spec = need<std::string>(c, vol, "kernel", "volatility");
    auto sig = parse_sigma(c, vol["sigma"], "volatility.sigma", &sc.sigma);
    sc.model.psi = ScalarPsi{sig, std::make_shared<KernelOperator>(parse_kernel(sc.space, sc.kernel_spec))};
  } else if (sc.volatility_kind == "state") {
    allow_keys(c, vol, "volatility", {"kind", "g"});
    if (!vol["g"]) throw ConfigError(at(c, vol, "volatility") + ": state volatility needs g");
    const Curve g = parse_curve(c, vol["g"], "volatility.g", sc.space).curve;
    sc.model.psi = StatePsi{[g](double) { return g; }};
  } else {
    throw ConfigError(at(c, vol["kind"], "volatility.kind") + ": expected identity, kernel or state");
  }

  sc.run.dt = sc.space.dx();
  if (const YAML::Node run = root["run"]) {
    allow_keys(c, run, "run", {"horizon", "dt", "paths", "forwards", "surface_paths", "x_stride", "t_stride", "threads"});
    sc.run.horizon = get<double>(c, run, "horizon", "run", sc.run.horizon);
    sc.run.dt = get<double>(c, run, "dt", "run", sc.run.dt);
    sc.run.paths = get<std::size_t>(c, run, "paths", "run", sc.run.paths);
    if (run["forwards"]) sc.run.forwards = numbers(c, run["forwards"], "run.forwards");
    sc.run.surface_paths = get<std::size_t>(c, run, "surface_paths", "run", sc.run.surface_paths);
    sc.run.x_stride = get<std::size_t>(c, run, "x_stride", "run", sc.run.x_stride);
    sc.run.t_stride = get<std::size_t>(c, run, "t_stride", "run", sc.run.t_stride);
    sc.run.threads = get<unsigned>(c, run, "threads", "run", sc.run.threads);
  }
  if (sc.run.x_stride == 0 || sc.run.t_stride == 0) throw ConfigError(c.origin + ": strides must be positive");
  if (std::abs(sc.run.dt - sc.space.dx()) > 1e-12 * sc.space.dx()) {
    throw ConfigError(c.origin + ": run.dt = " + format_double(sc.run.dt) + " must equal the grid step space.dx = " +
                      format_double(sc.space.dx()));
  }
  step_count(sc.run.horizon, sc.run.dt);
  if (!root["run"] || !root["run"]["forwards"]) {
    std::erase_if(sc.run.forwards, [&](double T) { return T > sc.space.x_max(); });
  }
  for (double T : sc.run.forwards) {
    if (!(T >= 0.0) || T > sc.space.x_max()) throw ConfigError(c.origin + ": forward maturities must lie in [0, x_max]");
  }

  for (int i = 1; i <= 20; ++i) {
    sc.corr.xs.push_back(0.25 * i);
  }
  sc.corr.ys = sc.corr.xs;
  if (const YAML::Node corr = root["corr"]) {
    allow_keys(c, corr, "corr", {"x", "y"});
    if (corr["x"]) sc.corr.xs = numbers(c, corr["x"], "corr.x");
    if (corr["y"]) sc.corr.ys = numbers(c, corr["y"], "corr.y");
  }
  if (const YAML::Node b = root["basis"]) {
    allow_keys(c, b, "basis", {"x0", "lambda", "n_max"});
    sc.basis.x0 = get<double>(c, b, "x0", "basis", sc.basis.x0);
    if (b["lambda"]) sc.basis.lambda = read<double>(c, b["lambda"], "basis.lambda");
    sc.basis.n_max = get<int>(c, b, "n_max", "basis", sc.basis.n_max);
  }
  return sc;
}

const char* kLuciaSchwartz = R"(
name: lucia-schwartz-1f
space: {alpha: 1.0, dx: 0.004, x_max: 5.0}
f0: {kind: exp, level: 38.0, long: 42.0, rate: 0.9}
driver:
  kind: wiener
  seed: 1
  factors:
    - {kind: exp, level: 9.0, rate: 1.4}
volatility: {kind: identity}
run: {horizon: 1.0, paths: 2000, forwards: [0.5, 1.0, 2.0, 3.0], surface_paths: 2}
basis: {x0: 2.0, n_max: 8}
)";

}  // namespace

void Scenario::set_mode(Mode m) {
  if (m == Mode::RiskNeutral) model.beta = nullptr;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  const Ctx c{origin, std::filesystem::path(origin).parent_path()};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": parse error: " + e.msg);
  }
  try {
    return build(root, c);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::vector<std::string> builtin_scenarios() { return {"lucia-schwartz-1f"}; }

Scenario builtin_scenario(const std::string& name) {
  if (name == "lucia-schwartz-1f") return parse_scenario(kLuciaSchwartz, "builtin:" + name);
  throw ConfigError("unknown built-in scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& ref) {
  const std::string prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) return builtin_scenario(ref.substr(prefix.size()));
  return load_scenario_file(ref);
}

}  // namespace fcurve
