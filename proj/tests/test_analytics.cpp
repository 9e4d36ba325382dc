#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "fcurve/analytics.hpp"
#include "fcurve/errors.hpp"
#include "fcurve/noise.hpp"

using namespace fcurve;

namespace {

// <Q h_x, h_y> = int_0^x exp(-delta |y - v|) exp(-alpha v) dv for x <= y
double exp_kernel_cov(double alpha, double delta, double x, double y) {
  const double lo = std::min(x, y), hi = std::max(x, y);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double v) { return std::exp(-delta * std::abs(hi - v) - alpha * v); }, 0.0, lo, 15, 1e-14);
}

double exp_kernel_quadrature(double alpha, double delta, double x, double y) {
  return exp_kernel_cov(alpha, delta, x, y) /
         std::sqrt(exp_kernel_cov(alpha, delta, x, x) * exp_kernel_cov(alpha, delta, y, y));
}

FactorCovariance three_factors(const Space& s) {
  return FactorCovariance(s, {Curve::from_function(s, [](double x) { return 0.9 * std::exp(-1.4 * x); }),
                              Curve::from_function(s, [](double x) { return 0.5 * std::exp(-0.8 * x) * std::cos(2.0 * x); }),
                              Curve::from_function(s, [](double x) { return 0.3 * std::tanh(x); })});
}

}  // namespace

TEST_CASE("exponential kernel correlation") {
  CHECK(exp_kernel_correlation(1.0, 0.5, 1.0, 2.0) == doctest::Approx(0.614443381279468).epsilon(1e-13));
  CHECK(exp_kernel_quadrature(1.0, 0.5, 1.0, 2.0) == doctest::Approx(0.614443381279468).epsilon(1e-12));
  double worst = 0.0;
  for (int i = 1; i <= 20; ++i) {
    for (int j = 1; j <= 20; ++j) {
      const double x = 0.25 * i, y = 0.25 * j;
      worst = std::max(worst, std::abs(exp_kernel_correlation(1.0, 0.5, x, y) - exp_kernel_quadrature(1.0, 0.5, x, y)));
    }
  }
  CHECK(worst < 1e-6);
  CHECK(exp_kernel_correlation(2.0, 0.3, 1.7, 1.7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exp_kernel_correlation(1.0, 0.5, 2.0, 1.0) == exp_kernel_correlation(1.0, 0.5, 1.0, 2.0));
  CHECK(std::abs(exp_kernel_correlation(1.0, 0.5, 1.0, 1.5) - exp_kernel_correlation(1.0, 0.5, 2.0, 2.5)) > 1e-3);
  CHECK_THROWS_AS(exp_kernel_correlation(1.0, 1.0, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(exp_kernel_correlation(1.0, 0.5, 0.0, 2.0), std::domain_error);
}

TEST_CASE("correlation of factor covariances") {
  const Space s;
  SUBCASE("rank one through two representers is perfectly correlated") {
    const FactorCovariance q(s, {h_curve(s, 1.0) + h_curve(s, 2.5)});
    CHECK(spatial_correlation(q, 1.0, 2.5) == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("zero covariance gives the conventional value") {
    const FactorCovariance q(s, {Curve(s)});
    CHECK(spatial_correlation(q, 1.0, 2.0) == 1.0);
  }
  SUBCASE("Cauchy-Schwarz and the diagonal") {
    const FactorCovariance q = three_factors(s);
    for (double x = 0.0; x <= 5.0; x += 0.5) {
      CHECK(spatial_correlation(q, x, x) == doctest::Approx(1.0).epsilon(1e-13));
      for (double y = 0.0; y <= 5.0; y += 0.5) CHECK(std::abs(spatial_correlation(q, x, y)) <= 1.0 + 1e-13);
    }
  }
  SUBCASE("operator norm estimates agree") {
    const FactorCovariance q = three_factors(s);
    CHECK(operator_norm(q) == doctest::Approx(q.op_norm()).epsilon(1e-8));
  }
}

TEST_CASE("local lower bound") {
  const Space s;
  const FactorCovariance q = three_factors(s);
  int inside = 0;
  for (double x = 0.1; x <= 5.0; x += 0.3) {
    const CorrelationBound same = correlation_lower_bound(q, x, x);
    CHECK(same.lower_bound == 1.0);
    CHECK(same.rho == doctest::Approx(1.0).epsilon(1e-13));
    for (double y = 0.0; y <= 5.0; y += 0.02) {
      const CorrelationBound b = correlation_lower_bound(q, x, y);
      if (!b.in_radius) continue;
      ++inside;
      CHECK(b.rho >= b.lower_bound - 1e-10);
    }
  }
  CHECK(inside > 50);

  // 1 - bound ~ sqrt|x - y| near the diagonal
  const double x = 1.0;
  const double eps = correlation_lower_bound(q, x, x).radius;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const double d = eps * std::pow(10.0, -4.0 + 2.0 * i / (n - 1));
    const double lx = std::log(d);
    const double ly = std::log(1.0 - correlation_lower_bound(q, x, x + d).lower_bound);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(0.5).epsilon(0.1));

  const auto table = correlation_table(q, {0.5, 1.0}, {0.5, 1.0, 1.5});
  CHECK(table.size() == 6);
  CHECK(table[4].y == 1.0);
}

TEST_CASE("correlation matches sampled point evaluations") {
  const Space s;
  const FactorCovariance q = three_factors(s);
  const double x = 0.8, y = 2.1;
  std::vector<double> gx, gy;
  for (const Curve& g : q.factors()) {
    gx.push_back(g(x));
    gy.push_back(g(y));
  }
  std::mt19937_64 rng(44);
  std::normal_distribution<double> nd;
  const int n = 100000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) {
      const double z = nd(rng);
      a += z * gx[k];
      b += z * gy[k];
    }
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double mc = sxy / std::sqrt(sxx * syy);
  const double rho = spatial_correlation(q, x, y);
  CHECK(std::abs(mc - rho) < 3.0 * (1.0 - rho * rho) / std::sqrt(n));
}
