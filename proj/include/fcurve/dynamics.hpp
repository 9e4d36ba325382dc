#pragma once

#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fcurve/noise.hpp"
#include "fcurve/operators.hpp"

namespace fcurve {

// Volatility operator Psi(t, f).
struct ConstantPsi {
  OperatorPtr op;
};
// Psi(t) = sigma(t) T
struct ScalarPsi {
  std::function<double(double)> sigma;
  OperatorPtr op;
};
// Psi(t, f) = multiplication by f g(t)
struct StatePsi {
  std::function<Curve(double)> g;
};
using PsiSpec = std::variant<ConstantPsi, ScalarPsi, StatePsi>;

struct ModelSpec {
  Curve f0;
  std::function<Curve(double)> beta;  // empty means zero drift
  PsiSpec psi;
  DriverSpec driver;
  double divergence_factor = 1e6;
};

struct ForwardSurface {
  std::vector<double> times;
  std::vector<Curve> curves;
};

// Called once per path and time index, including t = 0. With threads > 1 the
// observer is invoked concurrently for different paths.
using StepObserver = std::function<void(std::size_t path, std::size_t step, double t, const Curve& f)>;

std::size_t step_count(double horizon, double dt);

// Exponential-Euler scheme f_{k+1} = U_dt (f_k + beta(t_k) dt + Psi(t_k, f_k) dL_k);
// dt must be a whole number of grid cells.
void simulate_mild(const ModelSpec& model, double horizon, double dt, std::size_t n_paths,
                   const StepObserver& observer, unsigned threads = 1);

std::vector<ForwardSurface> simulate_surfaces(const ModelSpec& model, double horizon, double dt,
                                              std::size_t n_paths);

std::vector<double> spot_path(const ForwardSurface& s);
// F(t_k, T) = f(t_k)(T - t_k) for all t_k <= T
std::vector<double> forward_path(const ForwardSurface& s, double maturity);

// Per-time sample moments of scalar functionals of the curve, measured as
// increments from their t = 0 value. Accumulation happens in fixed blocks of
// paths that are merged in order, so results do not depend on thread count.
struct Observable {
  enum class Kind { Spot, Forward, CurveValue };
  Kind kind = Kind::Spot;
  double where = 0.0;  // maturity for Forward, x for CurveValue

  static Observable spot() { return {Kind::Spot, 0.0}; }
  static Observable forward(double maturity) { return {Kind::Forward, maturity}; }
  static Observable curve_value(double x) { return {Kind::CurveValue, x}; }
};

class PathStatistics {
 public:
  PathStatistics() = default;
  PathStatistics(std::vector<Observable> obs, std::size_t n_times, std::vector<std::pair<std::size_t, std::size_t>> pairs);

  // value of observable j at time t for the curve f; NaN once a forward has expired
  static double evaluate(const Observable& o, double t, const Curve& f);

  void add_path(const std::vector<std::vector<double>>& values);  // [time][observable]
  void merge(const PathStatistics& other);

  std::size_t paths() const { return paths_; }
  std::size_t times() const { return n_times_; }
  const std::vector<Observable>& observables() const { return obs_; }
  double initial(std::size_t j) const { return initial_[j]; }
  std::size_t count(std::size_t k, std::size_t j) const { return count_[idx(k, j)]; }
  // mean of the increment X(t_k) - X(0)
  double mean_increment(std::size_t k, std::size_t j) const;
  double variance(std::size_t k, std::size_t j) const;
  // standardised drift of the increment: mean / (sd / sqrt(n))
  double drift_z(std::size_t k, std::size_t j) const;
  double covariance(std::size_t k, std::size_t pair) const;
  // standard error of covariance(k, pair) from the sample of products
  double covariance_se(std::size_t k, std::size_t pair) const;
  // standard error of variance(k, j) from the fourth central moment
  double variance_se(std::size_t k, std::size_t j) const;

 private:
  std::size_t idx(std::size_t k, std::size_t j) const { return k * obs_.size() + j; }
  std::vector<Observable> obs_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::size_t n_times_ = 0;
  std::size_t paths_ = 0;
  std::vector<double> initial_;
  std::vector<std::size_t> count_;
  std::vector<double> s1_, s2_, s3_, s4_;
  std::vector<double> p1_, p2_;  // sums of products and squared products per pair
};

PathStatistics simulate_statistics(const ModelSpec& model, double horizon, double dt, std::size_t n_paths,
                                   const std::vector<Observable>& obs,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs = {},
                                   unsigned threads = 1);

// sigma^2(t, s) = <Psi(s) Q Psi(s)* h_{t-s}, h_{t-s}> (state-independent Psi only)
double spot_variance_density(const ModelSpec& model, double t, double s);
double spot_vol_sigma(const ModelSpec& model, double t, double s);
// 2x2 covariance density of (F(., T1), F(., T2)) at time s, and its square root
ReducedNoise bivariate_sigma(const ModelSpec& model, double t1, double t2, double s);

// Factor model f(t) = U_t f0 + sum_n g_n X_n(t), g_n(x) = level_n exp(-rate_n x),
// dX_n = (mu_n - rate_n X_n) dt + sigma(t) dL_n.
struct OUFactor {
  double level = 1.0;
  double rate = 1.0;
  double mu = 0.0;
};

struct OUFactorModel {
  Curve f0;
  std::vector<OUFactor> factors;
  std::function<double(double)> sigma;  // empty means 1
  DriverKind kind = DriverKind::Wiener;
  double ig_mu = 1.0;
  double ig_lambda = 1.0;
  std::uint64_t seed = 0;

  std::vector<Curve> factor_curves() const;
  DriverSpec driver() const;
  // The same dynamics written for simulate_mild (Psi = sigma(t) Id).
  ModelSpec mild_model() const;
};

// Gaussian drivers use the exact OU transition driven by the same random
// numbers as the mild scheme; NIG drivers use left-point exponential Euler.
void ou_factor_simulate(const OUFactorModel& model, double horizon, double dt, std::size_t n_paths,
                        const StepObserver& observer);
std::vector<ForwardSurface> ou_factor_surfaces(const OUFactorModel& model, double horizon, double dt,
                                               std::size_t n_paths);

// CARMA(p, q) kernel xi(x) = b^T exp(A x) e_p with A the companion matrix of
// the autoregressive coefficients (a_1, ..., a_p) and b = (b_0, ..., b_q, 0, ...).
Eigen::MatrixXd carma_companion(const std::vector<double>& ar);
double carma_kernel_value(const std::vector<double>& ar, const std::vector<double>& ma, double x);
Curve carma_kernel(const Space& s, const std::vector<double>& ar, const std::vector<double>& ma);

}  // namespace fcurve
