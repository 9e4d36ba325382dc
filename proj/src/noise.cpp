#include "fcurve/noise.hpp"

#include <cmath>
#include <numbers>

#include "fcurve/errors.hpp"

namespace fcurve {

FactorCovariance::FactorCovariance(Space s, std::vector<Curve> factors)
    : space_(std::move(s)), factors_(std::move(factors)) {
  for (const auto& g : factors_) require_same_space(space_, g.space());
}

Curve FactorCovariance::apply(const Curve& f) const {
  Curve out(space_);
  for (const auto& g : factors_) out.axpy(inner_product(g, f), g);
  return out;
}

double FactorCovariance::trace() const {
  double t = 0.0;
  for (const auto& g : factors_) {
    const double n = norm(g);
    t += n * n;
  }
  return t;
}

Eigen::MatrixXd FactorCovariance::gram() const {
  const auto n = static_cast<Eigen::Index>(factors_.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = inner_product(factors_[static_cast<std::size_t>(i)], factors_[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

double FactorCovariance::op_norm() const {
  if (factors_.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(), Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

void DriverSpec::validate() const {
  if (!covariance) throw ConfigError("driver has no factor covariance");
  if (kind == DriverKind::NIG) {
    if (!(ig_mu > 0.0) || !(ig_lambda > 0.0)) throw ConfigError("NIG driver needs ig_mu > 0 and ig_lambda > 0");
  }
}

namespace counter_rng {

namespace {
// SplitMix64 finaliser
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t bits(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream,
                   std::uint64_t sub) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ path);
  h = mix(h ^ step);
  h = mix(h ^ stream);
  return mix(h ^ sub);
}

double uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream) {
  // open interval (0, 1)
  return (static_cast<double>(bits(seed, path, step, stream, 0) >> 11) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream) {
  const double u1 = (static_cast<double>(bits(seed, path, step, stream, 1) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(bits(seed, path, step, stream, 2) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace counter_rng

double inverse_gaussian_transform(double mean, double shape, double normal, double uniform) {
  const double y = normal * normal;
  const double my = mean * y;
  // mean - mean/(2 shape) (sqrt(4 mean shape y + (mean y)^2) - mean y), cancellation-free
  if (my == 0.0) return mean;
  const double root = std::sqrt(4.0 * mean * shape * y + my * my);
  const double sum = my + root;
  // smaller root of the quadratic, written without cancellation
  const double x = mean * (4.0 * mean * shape * y) / (sum * sum);
  if (uniform <= mean / (mean + x)) return x;
  return mean * mean / x;
}

double sample_step(const DriverSpec& d, double dt, std::uint64_t path, std::uint64_t step, std::span<double> out) {
  using namespace counter_rng;
  double scale = std::sqrt(dt);
  double theta = dt;
  if (d.kind == DriverKind::NIG) {
    const double mean = d.ig_mu * dt;
    const double shape = d.ig_lambda * dt * dt;
    theta = inverse_gaussian_transform(mean, shape, normal(d.seed, path, step, kTimeChangeNormal),
                                       uniform(d.seed, path, step, kTimeChangeUniform));
    scale = std::sqrt(theta);
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = scale * normal(d.seed, path, step, kFactorStream + n);
  return theta;
}

NoiseIncrements sample_increments(const DriverSpec& d, double dt, std::size_t steps, std::uint64_t path) {
  d.validate();
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const std::size_t nf = d.covariance->size();
  NoiseIncrements inc;
  inc.dt = dt;
  inc.dL.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(nf));
  if (d.kind == DriverKind::NIG) inc.time_change.resize(static_cast<Eigen::Index>(steps));
  std::vector<double> row(nf);
  for (std::size_t k = 0; k < steps; ++k) {
    const double theta = sample_step(d, dt, path, k, row);
    for (std::size_t n = 0; n < nf; ++n) inc.dL(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = row[n];
    if (d.kind == DriverKind::NIG) inc.time_change[static_cast<Eigen::Index>(k)] = theta;
  }
  return inc;
}

ReducedNoise reduce_to_ndim(const std::vector<double>& points, const LinearOperator& psi,
                            const FactorCovariance& q, double variance_scale) {
  const auto n = static_cast<Eigen::Index>(points.size());
  std::vector<Curve> images;
  images.reserve(points.size());
  for (double x : points) images.push_back(psi.apply(q.apply(psi.apply_adjoint(h_curve(psi.space(), x)))));
  ReducedNoise out;
  out.covariance.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.covariance(i, j) = variance_scale * images[static_cast<std::size_t>(i)](points[static_cast<std::size_t>(j)]);
    }
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.covariance);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ev[i] < -1e-10 * scale) throw NumericalError("reduced covariance is not positive semidefinite");
    ev[i] = std::max(0.0, ev[i]);
  }
  out.sqrt = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return out;
}

}  // namespace fcurve
