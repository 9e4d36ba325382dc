#include "fcurve/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "fcurve/errors.hpp"

namespace fcurve {

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw ConfigError("horizon must be non-negative and dt positive");
  const double r = horizon / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) throw ConfigError("horizon must be a whole number of time steps");
  return static_cast<std::size_t>(n);
}

namespace {

struct Stepper {
  const ModelSpec& model;
  double dt;
  std::size_t cells_per_step;
  std::vector<Curve> psi_g;  // Psi g_n for state-independent Psi
  double cap;

  Stepper(const ModelSpec& m, double dt_) : model(m), dt(dt_) {
    m.driver.validate();
    const Space& s = m.f0.space();
    require_same_space(s, m.driver.covariance->space());
    cells_per_step = s.steps(dt);
    if (cells_per_step == 0) throw ConfigError("time step must be at least one grid cell");
    if (const auto* c = std::get_if<ConstantPsi>(&m.psi)) {
      if (!c->op) throw ConfigError("constant volatility operator is missing");
      for (const auto& g : m.driver.covariance->factors()) psi_g.push_back(c->op->apply(g));
    } else if (const auto* sc = std::get_if<ScalarPsi>(&m.psi)) {
      if (!sc->op || !sc->sigma) throw ConfigError("scalar volatility needs sigma and an operator");
      for (const auto& g : m.driver.covariance->factors()) psi_g.push_back(sc->op->apply(g));
    } else if (!std::get<StatePsi>(m.psi).g) {
      throw ConfigError("state-dependent volatility needs g");
    }
    cap = m.divergence_factor * std::max(1.0, norm(m.f0));
  }

  void run_path(std::size_t path, std::size_t steps, const StepObserver& obs) const {
    const auto& factors = model.driver.covariance->factors();
    std::vector<double> dl(factors.size());
    Curve f = model.f0;
    obs(path, 0, 0.0, f);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      sample_step(model.driver, dt, path, k, dl);
      if (const auto* sp = std::get_if<StatePsi>(&model.psi)) {
        Curve noise(f.space());
        for (std::size_t n = 0; n < dl.size(); ++n) noise.axpy(dl[n], factors[n]);
        const Curve incr = multiply(multiply(f, sp->g(t)), noise);
        f += incr;
      } else {
        double scale = 1.0;
        if (const auto* sc = std::get_if<ScalarPsi>(&model.psi)) scale = sc->sigma(t);
        for (std::size_t n = 0; n < dl.size(); ++n) f.axpy(scale * dl[n], psi_g[n]);
      }
      if (model.beta) f.axpy(dt, model.beta(t));
      shift_in_place(f, cells_per_step);
      const double nf = norm(f);
      if (!(nf <= cap)) {
        throw DivergenceError("simulation diverged at t = " + std::to_string(t + dt) + " on path " +
                              std::to_string(path));
      }
      obs(path, k + 1, static_cast<double>(k + 1) * dt, f);
    }
  }
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, const Fn& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

void simulate_mild(const ModelSpec& model, double horizon, double dt, std::size_t n_paths,
                   const StepObserver& observer, unsigned threads) {
  const std::size_t steps = step_count(horizon, dt);
  const Stepper stepper(model, dt);
  parallel_for(n_paths, threads, [&](std::size_t p) { stepper.run_path(p, steps, observer); });
}

std::vector<ForwardSurface> simulate_surfaces(const ModelSpec& model, double horizon, double dt,
                                              std::size_t n_paths) {
  std::vector<ForwardSurface> out(n_paths);
  simulate_mild(model, horizon, dt, n_paths, [&](std::size_t p, std::size_t, double t, const Curve& f) {
    out[p].times.push_back(t);
    out[p].curves.push_back(f);
  });
  return out;
}

std::vector<double> spot_path(const ForwardSurface& s) {
  std::vector<double> out;
  out.reserve(s.curves.size());
  for (const auto& c : s.curves) out.push_back(c.f0());
  return out;
}

std::vector<double> forward_path(const ForwardSurface& s, double maturity) {
  std::vector<double> out;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double tau = maturity - s.times[k];
    if (tau < -1e-12) break;
    out.push_back(s.curves[k](std::max(0.0, tau)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Path statistics

PathStatistics::PathStatistics(std::vector<Observable> obs, std::size_t n_times,
                               std::vector<std::pair<std::size_t, std::size_t>> pairs)
    : obs_(std::move(obs)), pairs_(std::move(pairs)), n_times_(n_times) {
  const std::size_t m = n_times_ * obs_.size();
  initial_.assign(obs_.size(), std::numeric_limits<double>::quiet_NaN());
  count_.assign(m, 0);
  s1_.assign(m, 0.0);
  s2_.assign(m, 0.0);
  s3_.assign(m, 0.0);
  s4_.assign(m, 0.0);
  p1_.assign(n_times_ * pairs_.size(), 0.0);
  p2_.assign(n_times_ * pairs_.size(), 0.0);
  for (const auto& [a, b] : pairs_) {
    if (a >= obs_.size() || b >= obs_.size()) throw std::invalid_argument("covariance pair out of range");
  }
}

double PathStatistics::evaluate(const Observable& o, double t, const Curve& f) {
  switch (o.kind) {
    case Observable::Kind::Spot:
      return f.f0();
    case Observable::Kind::Forward: {
      const double tau = o.where - t;
      if (tau < -1e-12) return std::numeric_limits<double>::quiet_NaN();
      return f(std::max(0.0, tau));
    }
    case Observable::Kind::CurveValue:
      return f(o.where);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void PathStatistics::add_path(const std::vector<std::vector<double>>& values) {
  if (values.size() != n_times_) throw std::invalid_argument("path length does not match statistics");
  const std::size_t m = obs_.size();
  if (paths_ == 0) {
    for (std::size_t j = 0; j < m; ++j) initial_[j] = values[0][j];
  }
  for (std::size_t k = 0; k < n_times_; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = values[k][j] - initial_[j];
      if (!std::isfinite(x)) continue;
      const std::size_t i = idx(k, j);
      const double x2 = x * x;
      ++count_[i];
      s1_[i] += x;
      s2_[i] += x2;
      s3_[i] += x2 * x;
      s4_[i] += x2 * x2;
    }
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const double a = values[k][pairs_[p].first] - initial_[pairs_[p].first];
      const double b = values[k][pairs_[p].second] - initial_[pairs_[p].second];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      p1_[k * pairs_.size() + p] += a * b;
      p2_[k * pairs_.size() + p] += a * a * b * b;
    }
  }
  ++paths_;
}

void PathStatistics::merge(const PathStatistics& o) {
  if (o.paths_ == 0) return;
  if (paths_ == 0) {
    *this = o;
    return;
  }
  if (o.n_times_ != n_times_ || o.obs_.size() != obs_.size()) throw std::invalid_argument("incompatible statistics");
  for (std::size_t j = 0; j < obs_.size(); ++j) {
    if (o.initial_[j] != initial_[j] && !(std::isnan(o.initial_[j]) && std::isnan(initial_[j]))) {
      throw std::invalid_argument("statistics blocks start from different initial values");
    }
  }
  for (std::size_t i = 0; i < count_.size(); ++i) {
    count_[i] += o.count_[i];
    s1_[i] += o.s1_[i];
    s2_[i] += o.s2_[i];
    s3_[i] += o.s3_[i];
    s4_[i] += o.s4_[i];
  }
  for (std::size_t i = 0; i < p1_.size(); ++i) {
    p1_[i] += o.p1_[i];
    p2_[i] += o.p2_[i];
  }
  paths_ += o.paths_;
}

double PathStatistics::mean_increment(std::size_t k, std::size_t j) const {
  const std::size_t i = idx(k, j);
  return count_[i] ? s1_[i] / static_cast<double>(count_[i]) : std::numeric_limits<double>::quiet_NaN();
}

double PathStatistics::variance(std::size_t k, std::size_t j) const {
  const std::size_t i = idx(k, j);
  const double n = static_cast<double>(count_[i]);
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mu = s1_[i] / n;
  return (s2_[i] - n * mu * mu) / (n - 1.0);
}

double PathStatistics::drift_z(std::size_t k, std::size_t j) const {
  const std::size_t i = idx(k, j);
  const double n = static_cast<double>(count_[i]);
  const double v = variance(k, j);
  if (!(v > 0.0)) return 0.0;
  return mean_increment(k, j) / std::sqrt(v / n);
}

double PathStatistics::covariance(std::size_t k, std::size_t p) const {
  const auto [a, b] = pairs_[p];
  const double n = static_cast<double>(paths_);
  const double ma = mean_increment(k, a);
  const double mb = mean_increment(k, b);
  return (p1_[k * pairs_.size() + p] - n * ma * mb) / (n - 1.0);
}

double PathStatistics::covariance_se(std::size_t k, std::size_t p) const {
  const double n = static_cast<double>(paths_);
  const double m1 = p1_[k * pairs_.size() + p] / n;
  const double m2 = p2_[k * pairs_.size() + p] / n;
  return std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
}

double PathStatistics::variance_se(std::size_t k, std::size_t j) const {
  const std::size_t i = idx(k, j);
  const double n = static_cast<double>(count_[i]);
  const double e1 = s1_[i] / n;
  const double e2 = s2_[i] / n;
  const double e3 = s3_[i] / n;
  const double e4 = s4_[i] / n;
  const double m2 = e2 - e1 * e1;
  const double m4 = e4 - 4.0 * e1 * e3 + 6.0 * e1 * e1 * e2 - 3.0 * e1 * e1 * e1 * e1;
  return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
}

PathStatistics simulate_statistics(const ModelSpec& model, double horizon, double dt, std::size_t n_paths,
                                   const std::vector<Observable>& obs,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                   unsigned threads) {
  constexpr std::size_t kBlock = 64;
  const std::size_t steps = step_count(horizon, dt);
  const Stepper stepper(model, dt);
  const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<PathStatistics> blocks(n_blocks);
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    PathStatistics st(obs, steps + 1, pairs);
    std::vector<std::vector<double>> values(steps + 1, std::vector<double>(obs.size()));
    const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) {
      stepper.run_path(p, steps, [&](std::size_t, std::size_t k, double t, const Curve& f) {
        for (std::size_t j = 0; j < obs.size(); ++j) values[k][j] = PathStatistics::evaluate(obs[j], t, f);
      });
      st.add_path(values);
    }
    blocks[b] = std::move(st);
  });
  PathStatistics total(obs, steps + 1, pairs);
  for (const auto& b : blocks) total.merge(b);
  return total;
}

// ---------------------------------------------------------------------------
// Volatility densities

namespace {
OperatorPtr psi_at(const ModelSpec& model, double s) {
  if (const auto* c = std::get_if<ConstantPsi>(&model.psi)) return c->op;
  if (const auto* sc = std::get_if<ScalarPsi>(&model.psi)) return std::make_shared<ScaledOperator>(sc->sigma(s), sc->op);
  throw ConfigError("volatility density needs a state-independent volatility operator");
}
}  // namespace

double spot_variance_density(const ModelSpec& model, double t, double s) {
  if (s > t) throw std::domain_error("volatility density needs s <= t");
  const OperatorPtr psi = psi_at(model, s);
  const auto r = reduce_to_ndim({t - s}, *psi, *model.driver.covariance, model.driver.variance_scale());
  return r.covariance(0, 0);
}

double spot_vol_sigma(const ModelSpec& model, double t, double s) {
  return std::sqrt(spot_variance_density(model, t, s));
}

ReducedNoise bivariate_sigma(const ModelSpec& model, double t1, double t2, double s) {
  if (s > t1 || s > t2) throw std::domain_error("volatility density needs s <= maturities");
  const OperatorPtr psi = psi_at(model, s);
  return reduce_to_ndim({t1 - s, t2 - s}, *psi, *model.driver.covariance, model.driver.variance_scale());
}

// ---------------------------------------------------------------------------
// OU factor models

std::vector<Curve> OUFactorModel::factor_curves() const {
  const Space& s = f0.space();
  std::vector<Curve> out;
  for (const auto& fac : factors) {
    if (!(fac.rate > 0.5 * s.alpha())) {
      throw SpecViolation("OU factor rate " + std::to_string(fac.rate) + " must exceed alpha/2 for the factor to lie in the space");
    }
    const double lv = fac.level;
    const double r = fac.rate;
    out.push_back(Curve::from_function(s, [lv, r](double x) { return lv * std::exp(-r * x); }));
  }
  return out;
}

DriverSpec OUFactorModel::driver() const {
  DriverSpec d;
  d.kind = kind;
  d.ig_mu = ig_mu;
  d.ig_lambda = ig_lambda;
  d.seed = seed;
  d.covariance = std::make_shared<FactorCovariance>(f0.space(), factor_curves());
  return d;
}

ModelSpec OUFactorModel::mild_model() const {
  ModelSpec m;
  m.f0 = f0;
  m.driver = driver();
  const auto& g = m.driver.covariance->factors();
  bool any_mu = false;
  for (const auto& fac : factors) any_mu = any_mu || fac.mu != 0.0;
  if (any_mu) {
    Curve beta(f0.space());
    for (std::size_t n = 0; n < g.size(); ++n) beta.axpy(factors[n].mu, g[n]);
    m.beta = [beta](double) { return beta; };
  }
  auto sig = sigma ? sigma : std::function<double(double)>([](double) { return 1.0; });
  m.psi = ScalarPsi{sig, std::make_shared<IdentityOperator>(f0.space())};
  return m;
}

void ou_factor_simulate(const OUFactorModel& model, double horizon, double dt, std::size_t n_paths,
                        const StepObserver& observer) {
  using namespace counter_rng;
  const std::size_t steps = step_count(horizon, dt);
  const DriverSpec drv = model.driver();
  drv.validate();
  const auto& g = drv.covariance->factors();
  const std::size_t nf = g.size();
  const Space& s = model.f0.space();
  const std::size_t m = s.steps(dt);
  auto sig = model.sigma ? model.sigma : std::function<double(double)>([](double) { return 1.0; });

  std::vector<double> decay(nf), drift(nf), a(nf), b(nf);
  for (std::size_t n = 0; n < nf; ++n) {
    const double r = model.factors[n].rate;
    decay[n] = std::exp(-r * dt);
    if (drv.kind == DriverKind::Wiener) {
      drift[n] = model.factors[n].mu * (-std::expm1(-r * dt)) / r;
      // joint law of (dW, int e^{-r (t_{k+1} - s)} dW_s) given dW = sqrt(dt) z1
      const double var = -std::expm1(-2.0 * r * dt) / (2.0 * r);
      const double cov = -std::expm1(-r * dt) / r;
      a[n] = cov / std::sqrt(dt);
      b[n] = std::sqrt(std::max(0.0, var - a[n] * a[n]));
    } else {
      drift[n] = decay[n] * model.factors[n].mu * dt;
    }
  }

  std::vector<double> dl(nf), x(nf);
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::fill(x.begin(), x.end(), 0.0);
    Curve base = model.f0;
    observer(p, 0, 0.0, base);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const double sg = sig(t);
      if (drv.kind == DriverKind::Wiener) {
        for (std::size_t n = 0; n < nf; ++n) {
          const double z1 = normal(drv.seed, p, k, kFactorStream + n);
          const double z2 = normal(drv.seed, p, k, kCompanionStream + n);
          x[n] = decay[n] * x[n] + drift[n] + sg * (a[n] * z1 + b[n] * z2);
        }
      } else {
        sample_step(drv, dt, p, k, dl);
        for (std::size_t n = 0; n < nf; ++n) x[n] = decay[n] * (x[n] + sg * dl[n]) + drift[n];
      }
      shift_in_place(base, m);
      Curve f = base;
      for (std::size_t n = 0; n < nf; ++n) f.axpy(x[n], g[n]);
      observer(p, k + 1, static_cast<double>(k + 1) * dt, f);
    }
  }
}

std::vector<ForwardSurface> ou_factor_surfaces(const OUFactorModel& model, double horizon, double dt,
                                               std::size_t n_paths) {
  std::vector<ForwardSurface> out(n_paths);
  ou_factor_simulate(model, horizon, dt, n_paths, [&](std::size_t p, std::size_t, double t, const Curve& f) {
    out[p].times.push_back(t);
    out[p].curves.push_back(f);
  });
  return out;
}

// ---------------------------------------------------------------------------
// CARMA kernels

Eigen::MatrixXd carma_companion(const std::vector<double>& ar) {
  const auto p = static_cast<Eigen::Index>(ar.size());
  if (p < 1) throw ConfigError("CARMA needs at least one autoregressive coefficient");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i + 1 < p; ++i) a(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < p; ++j) a(p - 1, j) = -ar[static_cast<std::size_t>(p - 1 - j)];
  return a;
}

namespace {
Eigen::VectorXd carma_b(const std::vector<double>& ar, const std::vector<double>& ma) {
  if (ma.empty() || ma.size() > ar.size()) throw ConfigError("CARMA(p, q) needs 0 <= q < p");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ar.size()));
  for (std::size_t i = 0; i < ma.size(); ++i) b[static_cast<Eigen::Index>(i)] = ma[i];
  return b;
}
}  // namespace

double carma_kernel_value(const std::vector<double>& ar, const std::vector<double>& ma, double x) {
  const Eigen::MatrixXd a = carma_companion(ar);
  const Eigen::VectorXd b = carma_b(ar, ma);
  const Eigen::MatrixXd e = (a * x).exp();
  return b.dot(e.col(a.cols() - 1));
}

Curve carma_kernel(const Space& s, const std::vector<double>& ar, const std::vector<double>& ma) {
  const Eigen::MatrixXd a = carma_companion(ar);
  const Eigen::VectorXd b = carma_b(ar, ma);
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.eigenvalues().real().maxCoeff() >= -0.5 * s.alpha()) {
    throw SpecViolation("CARMA kernel does not decay fast enough to lie in the weighted space");
  }
  const Eigen::MatrixXd step = (a * s.dx()).exp();
  Eigen::VectorXd state = Eigen::VectorXd::Zero(a.rows());
  state[a.rows() - 1] = 1.0;
  std::vector<double> nodes(s.cells() + 1);
  for (std::size_t i = 0; i <= s.cells(); ++i) {
    nodes[i] = b.dot(state);
    state = step * state;
  }
  return Curve::from_nodes(s, nodes);
}

}  // namespace fcurve
