#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/inverse_gaussian.hpp>

#include "doctest.h"
#include "fcurve/errors.hpp"
#include "fcurve/noise.hpp"
#include "support.hpp"

using namespace fcurve;
namespace cr = fcurve::counter_rng;

namespace {

const Space& small_space() {
  static const Space s(WeightSpec{1.0}, GridSpec{2.0, 0.02});
  return s;
}

std::shared_ptr<const FactorCovariance> two_factors(const Space& s) {
  return std::make_shared<FactorCovariance>(
      s, std::vector<Curve>{Curve::from_function(s, [](double x) { return 0.8 * std::exp(-1.4 * x); }),
                            Curve::from_function(s, [](double x) { return 0.3 * std::exp(-0.7 * x) * std::cos(x); })});
}

// Kolmogorov-Smirnov statistic of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_CASE("counter random numbers are pure functions of their address") {
  CHECK(cr::bits(1, 2, 3, 4, 0) == cr::bits(1, 2, 3, 4, 0));
  CHECK(cr::bits(1, 2, 3, 4, 0) != cr::bits(1, 2, 3, 4, 1));
  CHECK(cr::bits(1, 2, 3, 4, 0) != cr::bits(1, 3, 2, 4, 0));
  CHECK(cr::normal(9, 0, 0, 0) != cr::normal(10, 0, 0, 0));

  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0, umin = 1.0, umax = 0.0, c = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = cr::normal(3, static_cast<std::uint64_t>(i), 5, 0);
    const double z2 = cr::normal(3, static_cast<std::uint64_t>(i), 5, 1);
    const double u = cr::uniform(3, static_cast<std::uint64_t>(i), 5, 2);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
    c += z * z2;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(c / n) < 4.0 / std::sqrt(n));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
}

TEST_CASE("inverse-Gaussian sampler matches the reference distribution") {
  struct Case {
    double mean, shape;
  };
  for (const Case cs : {Case{1.0, 2.0}, Case{0.004, 1.6e-5}, Case{2.0, 50.0}}) {
    CAPTURE(cs.mean);
    CAPTURE(cs.shape);
    const int n = 100000;
    std::vector<double> xs(n);
    double s1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto p = static_cast<std::uint64_t>(i);
      xs[static_cast<std::size_t>(i)] = inverse_gaussian_transform(cs.mean, cs.shape, cr::normal(17, p, 0, 0), cr::uniform(17, p, 0, 1));
      s1 += xs[static_cast<std::size_t>(i)];
      REQUIRE(xs[static_cast<std::size_t>(i)] > 0.0);
    }
    const double var = cs.mean * cs.mean * cs.mean / cs.shape;
    CHECK(std::abs(s1 / n - cs.mean) < 5.0 * std::sqrt(var / n));
    const boost::math::inverse_gaussian ref(cs.mean, cs.shape);
    // 1.63 / sqrt(n) is the 1% critical value
    CHECK(ks_statistic(xs, [&](double x) { return boost::math::cdf(ref, x); }) < 1.63 / std::sqrt(n));
  }
}

TEST_CASE("Wiener increments") {
  const Space& s = small_space();
  DriverSpec d;
  d.covariance = two_factors(s);
  d.seed = 99;
  const double dt = 0.02;
  const NoiseIncrements inc = sample_increments(d, dt, 50000, 3);
  CHECK(inc.time_change.size() == 0);
  const Eigen::MatrixXd& x = inc.dL;
  const double n = static_cast<double>(x.rows());
  CHECK(std::abs(x.col(0).mean()) < 4.0 * std::sqrt(dt / n));
  CHECK(std::abs(x.col(0).squaredNorm() / n - dt) < 4.0 * dt * std::sqrt(2.0 / n));
  CHECK(std::abs(x.col(1).squaredNorm() / n - dt) < 4.0 * dt * std::sqrt(2.0 / n));
  CHECK(std::abs(x.col(0).dot(x.col(1)) / n) < 4.0 * dt / std::sqrt(n));

  std::vector<double> out(2);
  CHECK(sample_step(d, dt, 3, 10, out) == dt);
  CHECK(out[0] == x(10, 0));
  CHECK(out[1] == x(10, 1));
}

TEST_CASE("NIG increments have a shared time change and fat tails") {
  const Space& s = small_space();
  DriverSpec d;
  d.kind = DriverKind::NIG;
  d.ig_mu = 1.5;
  d.ig_lambda = 2.0;
  d.covariance = two_factors(s);
  d.seed = 5;
  const double dt = 0.02;
  const NoiseIncrements inc = sample_increments(d, dt, 200000);
  const double n = static_cast<double>(inc.dL.rows());
  const double m_theta = d.ig_mu * dt;
  const double v_theta = d.ig_mu * d.ig_mu * d.ig_mu * dt / d.ig_lambda;
  CHECK(std::abs(inc.time_change.mean() - m_theta) < 5.0 * std::sqrt(v_theta / n));
  CHECK(d.variance_scale() == 1.5);
  const Eigen::VectorXd z = inc.dL.col(0);
  const double m2 = z.squaredNorm() / n;
  const double m4 = z.array().pow(4).sum() / n;
  CHECK(std::abs(z.mean()) < 5.0 * std::sqrt(m_theta / n));
  CHECK(std::abs(m2 - m_theta) < 5.0 * std::sqrt(m4 / n));
  CHECK(m4 / (m2 * m2) - 3.0 > 0.0);
  // conditionally independent factors stay uncorrelated
  CHECK(std::abs(inc.dL.col(0).dot(inc.dL.col(1)) / n) < 5.0 * std::sqrt(m4 / n));

  DriverSpec bad = d;
  bad.ig_lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("factor covariance") {
  const Space& s = small_space();
  const auto q = two_factors(s);
  std::mt19937_64 rng(2);
  const Curve f = fcurve::testing::random_curve(s, rng);
  Curve expect(s);
  for (const Curve& g : q->factors()) expect += inner_product(g, f) * g;
  CHECK(distance(q->apply(f), expect) <= 1e-13 * norm(expect));
  const Eigen::MatrixXd m = q->matrix();
  CHECK(m.trace() == doctest::Approx(q->trace()).epsilon(1e-12));
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
  CHECK(ev.maxCoeff() == doctest::Approx(q->op_norm()).epsilon(1e-10));
}

TEST_CASE("reduction to finitely many points") {
  const Space& s = small_space();
  const auto q = two_factors(s);
  const KernelOperator psi = expconv_kernel(s, 0.9);
  const std::vector<double> pts{0.0, 0.5, 1.0, 1.7};
  const ReducedNoise r = reduce_to_ndim(pts, psi, *q, 1.5);
  // factor route: Cov(x_i, x_j) = scale sum_n (Psi g_n)(x_i) (Psi g_n)(x_j)
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
  for (const Curve& g : q->factors()) {
    const Curve pg = psi.apply(g);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) expect(i, j) += 1.5 * pg(pts[static_cast<std::size_t>(i)]) * pg(pts[static_cast<std::size_t>(j)]);
    }
  }
  CHECK((r.covariance - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());
  CHECK((r.sqrt * r.sqrt - r.covariance).cwiseAbs().maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());
  // rank two: tiny negative eigenvalues are clamped
  CHECK(r.sqrt.allFinite());

  CHECK_THROWS_AS(reduce_to_ndim(pts, psi, *q, -1.0), NumericalError);
}
