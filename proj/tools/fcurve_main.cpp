#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include "fcurve/acceptance.hpp"
#include "fcurve/analytics.hpp"
#include "fcurve/config.hpp"
#include "fcurve/curve_io.hpp"
#include "fcurve/errors.hpp"
#include "fcurve/riesz.hpp"

namespace fs = std::filesystem;
using namespace fcurve;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string config = "builtin:lucia-schwartz-1f";
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::string mode = "physical";
  std::optional<unsigned> threads;
  std::vector<int> only;
};

// Collects output files in memory and writes them only once the command has
// succeeded, so a failed run never leaves truncated CSVs behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  std::ostringstream& file(const std::string& name) { return files_[name]; }
  void commit() {
    fs::create_directories(dir_);
    fs::remove(dir_ / ".failed");
    for (auto& [name, os] : files_) {
      const fs::path tmp = dir_ / (name + ".tmp");
      {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + tmp.string());
        f << os.str();
      }
      fs::rename(tmp, dir_ / name);
    }
  }

 private:
  fs::path dir_;
  std::map<std::string, std::ostringstream> files_;
};

std::string num(double v) { return format_double(v); }

Scenario load(const Options& o) {
  Scenario sc = resolve_scenario(o.config);
  if (o.seed) sc.set_seed(*o.seed);
  if (o.paths) sc.run.paths = *o.paths;
  if (o.threads) sc.run.threads = *o.threads;
  if (o.mode == "risk-neutral") {
    sc.set_mode(Mode::RiskNeutral);
  } else if (o.mode != "physical") {
    throw ConfigError("--mode must be physical or risk-neutral");
  }
  return sc;
}

json scenario_json(const Scenario& sc, const Options& o) {
  json j;
  j["scenario"] = sc.name;
  j["seed"] = sc.model.driver.seed;
  j["mode"] = o.mode;
  j["alpha"] = sc.space.alpha();
  j["dx"] = sc.space.dx();
  j["x_max"] = sc.space.x_max();
  j["driver"] = sc.model.driver.kind == DriverKind::NIG ? "nig" : "wiener";
  j["volatility"] = sc.volatility_kind;
  return j;
}

int cmd_simulate(const Options& o) {
  const Scenario sc = load(o);
  const ModelSpec& m = sc.model;
  const RunSettings& run = sc.run;
  OutputSet out(o.out);

  std::vector<Observable> obs{Observable::spot()};
  for (double T : run.forwards) obs.push_back(Observable::forward(T));
  const PathStatistics st = simulate_statistics(m, run.horizon, run.dt, run.paths, obs, {}, run.threads);
  const std::size_t steps = st.times() - 1;
  auto sampled = [&](std::size_t k) { return k % run.t_stride == 0 || k == steps; };

  // surfaces for the first few paths, on the same noise as the statistics
  auto& surf = out.file("surfaces.csv");
  surf << "path_id,t,x,value\n";
  std::vector<std::vector<std::string>> rows(std::min(run.surface_paths, run.paths));
  simulate_mild(m, run.horizon, run.dt, rows.size(), [&](std::size_t p, std::size_t k, double t, const Curve& f) {
    if (!sampled(k)) return;
    const auto v = f.node_values();
    std::string& buf = rows[p].emplace_back();
    for (std::size_t i = 0; i < v.size(); i += run.x_stride) {
      buf += std::to_string(p) + ',' + num(t) + ',' + num(sc.space.node(i)) + ',' + num(v[i]) + '\n';
    }
  });
  for (const auto& path_rows : rows) {
    for (const auto& r : path_rows) surf << r;
  }

  auto& spot = out.file("spot.csv");
  spot << "t,mean,std\n";
  auto& fwd = out.file("forwards.csv");
  fwd << "t,maturity,mean,std,drift_z\n";
  std::vector<double> zmax(obs.size(), 0.0);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * run.dt;
    for (std::size_t j = 0; j < obs.size(); ++j) {
      if (st.count(k, j) == 0) continue;
      const double mean = st.initial(j) + st.mean_increment(k, j);
      const double sd = std::sqrt(std::max(0.0, st.variance(k, j)));
      const double z = k == 0 ? 0.0 : st.drift_z(k, j);
      if (j > 0 && std::isfinite(z)) zmax[j] = std::max(zmax[j], std::abs(z));
      if (!sampled(k)) continue;
      if (j == 0) {
        spot << num(t) << ',' << num(mean) << ',' << num(sd) << '\n';
      } else {
        fwd << num(t) << ',' << num(obs[j].where) << ',' << num(mean) << ',' << num(sd) << ',' << num(z) << '\n';
      }
    }
  }

  json j = scenario_json(sc, o);
  j["paths"] = run.paths;
  j["horizon"] = run.horizon;
  j["dt"] = run.dt;
  j["f0_norm"] = norm(m.f0);
  j["noise_trace"] = m.driver.covariance->trace() * m.driver.variance_scale();
  json spot_j;
  spot_j["initial"] = st.initial(0);
  spot_j["final_mean"] = st.initial(0) + st.mean_increment(steps, 0);
  spot_j["final_variance"] = st.variance(steps, 0);
  if (!std::holds_alternative<StatePsi>(m.psi) && run.horizon > 0.0) {
    spot_j["theory_variance"] = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double s) { return spot_variance_density(m, run.horizon, s); }, 0.0, run.horizon, 5);
  }
  j["spot"] = spot_j;
  json fj = json::array();
  bool martingale_ok = true;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    json e;
    e["maturity"] = obs[i].where;
    std::size_t last = steps;
    while (last > 0 && st.count(last, i) == 0) --last;
    e["last_time"] = static_cast<double>(last) * run.dt;
    e["final_mean"] = st.initial(i) + st.mean_increment(last, i);
    e["final_variance"] = st.variance(last, i);
    e["max_abs_drift_z"] = zmax[i];
    martingale_ok = martingale_ok && zmax[i] <= 3.0;
    fj.push_back(e);
  }
  j["forwards"] = fj;
  json checks;
  if (!m.beta) {
    checks["martingale_max_abs_z_le_3"] = martingale_ok;
  } else {
    checks["martingale_max_abs_z_le_3"] = nullptr;  // only meaningful without drift
  }
  if (const auto* sp = std::get_if<ScalarPsi>(&m.psi)) {
    if (const auto* k = dynamic_cast<const KernelOperator*>(sp->op.get())) checks["kernel_schur_bound"] = schur_bound(*k).c;
  }
  j["checks"] = checks;
  out.file("summary.json") << j.dump(2) << '\n';
  out.commit();
  std::cout << "wrote surfaces.csv, spot.csv, forwards.csv, summary.json to " << o.out << '\n';
  return 0;
}

int cmd_corr(const Options& o) {
  const Scenario sc = load(o);
  OutputSet out(o.out);
  auto& os = out.file("corr.csv");
  os << "x,y,rho,lower_bound,radius\n";
  for (const auto& r : correlation_table(*sc.model.driver.covariance, sc.corr.xs, sc.corr.ys)) {
    os << num(r.x) << ',' << num(r.y) << ',' << num(r.bound.rho) << ',' << num(r.bound.lower_bound) << ','
       << num(r.bound.radius) << '\n';
  }
  out.commit();
  std::cout << "wrote corr.csv to " << o.out << '\n';
  return 0;
}

int cmd_basis(const Options& o) {
  const Scenario sc = load(o);
  const BasisSettings& b = sc.basis;
  const BiorthogonalSystem sys = b.lambda ? build_basis(sc.space, b.x0, *b.lambda, b.n_max)
                                          : build_basis(sc.space, b.x0, b.n_max);
  const Projection p = project_x0(sys, sc.model.f0);
  OutputSet out(o.out);
  auto& modes = out.file("basis.csv");
  modes << "n,eig_re,eig_im,coef_re,coef_im\n";
  for (int n = -b.n_max; n <= b.n_max; ++n) {
    const auto l = sys.eigenvalue(n);
    const auto c = sys.coefficient(sc.model.f0, n);
    modes << n << ',' << num(l.real()) << ',' << num(l.imag()) << ',' << num(c.real()) << ',' << num(c.imag()) << '\n';
  }
  auto& proj = out.file("projection.csv");
  proj << "x,f0,projection\n";
  const auto a = sc.model.f0.node_values();
  const auto pv = p.curve.node_values();
  for (std::size_t i = 0; i < a.size(); i += sc.run.x_stride) {
    proj << num(sc.space.node(i)) << ',' << num(a[i]) << ',' << num(pv[i]) << '\n';
  }
  json j = scenario_json(sc, o);
  j["x0"] = b.x0;
  j["lambda"] = sys.lambda();
  j["n_max"] = b.n_max;
  j["condition_number"] = sys.condition_number();
  j["biorthogonality_residual"] = sys.biorthogonality_residual();
  j["window_error"] = p.window_error;
  out.file("basis.json") << j.dump(2) << '\n';
  out.commit();
  std::cout << "wrote basis.csv, projection.csv, basis.json to " << o.out << '\n';
  return 0;
}

int cmd_validate(const Options& o) {
  const Scenario sc = load(o);
  const auto& q = *sc.model.driver.covariance;
  std::cout << "config " << o.config << ": ok\n"
            << "  scenario " << sc.name << ", " << q.size() << " factor(s), trace " << num(q.trace()) << ", grid "
            << sc.space.cells() << " cells\n";
  if (const auto* sp = std::get_if<ScalarPsi>(&sc.model.psi)) {
    if (const auto* k = dynamic_cast<const KernelOperator*>(sp->op.get())) {
      std::cout << "  volatility kernel Schur bound " << num(schur_bound(*k).c) << '\n';
    }
  }
  return 0;
}

int cmd_check(const Options& o) {
  acceptance::SuiteOptions so;
  so.seed = o.seed.value_or(7);
  so.threads = o.threads.value_or(1);
  so.log = &std::cerr;
  std::vector<acceptance::CriterionResult> results;
  if (o.only.empty()) {
    for (int id = 1; id <= 9; ++id) {
      results.push_back(acceptance::run_criterion(id, so));
      std::cout << acceptance::result_line(results.back()) << std::endl;
    }
  } else {
    for (int id : o.only) {
      results.push_back(acceptance::run_criterion(id, so));
      std::cout << acceptance::result_line(results.back()) << std::endl;
    }
  }
  OutputSet out(o.out);
  out.file("check_summary.json") << acceptance::summary_json(results, so.seed);
  out.commit();
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  return all ? 0 : 3;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const SpecViolation*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e) ||
      dynamic_cast<const std::out_of_range*>(&e)) {
    return 2;
  }
  return 4;
}

void mark_failed(const std::string& dir, const std::string& cmd, const std::exception& e) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream f(fs::path(dir) / ".failed");
  if (f) f << cmd << ": " << e.what() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward curve dynamics in weighted Sobolev-type spaces"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool run_flags) {
    sub->add_option("--config,--scenario", o.config, "Scenario file or builtin:NAME")->capture_default_str();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed");
    if (run_flags) {
      sub->add_option("--paths", o.paths, "Number of Monte Carlo paths");
      sub->add_option("--mode", o.mode, "physical or risk-neutral")
          ->check(CLI::IsMember({"physical", "risk-neutral"}))
          ->capture_default_str();
    }
    sub->add_option("--threads", o.threads, "Worker threads");
  };
  CLI::App* sim = app.add_subcommand("simulate", "Simulate forward curves and write CSV/JSON artifacts");
  add_common(sim, true);
  CLI::App* corr = app.add_subcommand("corr", "Spatial correlation table and local lower bound");
  add_common(corr, false);
  CLI::App* basis = app.add_subcommand("basis", "Biorthogonal basis and projection of the initial curve");
  add_common(basis, false);
  CLI::App* val = app.add_subcommand("validate", "Check a scenario without running it");
  add_common(val, true);
  CLI::App* chk = app.add_subcommand("check", "Run the acceptance suite");
  chk->add_option("--seed", o.seed, "Random seed");
  chk->add_option("--out", o.out, "Output directory")->capture_default_str();
  chk->add_option("--threads", o.threads, "Worker threads");
  chk->add_option("--only", o.only, "Run only these criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "simulate") return cmd_simulate(o);
    if (cmd == "corr") return cmd_corr(o);
    if (cmd == "basis") return cmd_basis(o);
    if (cmd == "validate") return cmd_validate(o);
    return cmd_check(o);
  } catch (const std::exception& e) {
    std::cerr << "fcurve " << cmd << ": error: " << e.what() << '\n';
    if (cmd != "validate") mark_failed(o.out, cmd, e);
    return exit_code(e);
  }
}
