#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "doctest.h"
#include "fcurve/dynamics.hpp"
#include "fcurve/errors.hpp"
#include "support.hpp"

using namespace fcurve;

namespace {

const Space& grid() {
  static const Space s(WeightSpec{1.0}, GridSpec{3.0, 0.01});
  return s;
}

std::shared_ptr<const FactorCovariance> factors(const Space& s, std::vector<Curve> g) {
  return std::make_shared<FactorCovariance>(s, std::move(g));
}

Curve expo(const Space& s, double level, double rate) {
  return Curve::from_function(s, [=](double x) { return level * std::exp(-rate * x); });
}

Curve backwardation(const Space& s) {
  return Curve::from_function(s, [](double x) { return 40.0 - 5.0 * std::exp(-0.9 * x); });
}

}  // namespace

TEST_CASE("without noise and drift the curve is transported") {
  const Space& s = grid();
  ModelSpec m;
  m.f0 = backwardation(s);
  m.psi = ScalarPsi{[](double) { return 0.0; }, std::make_shared<IdentityOperator>(s)};
  m.driver.covariance = factors(s, {expo(s, 1.0, 1.0)});
  const auto surf = simulate_surfaces(m, 1.0, 0.05, 1);
  REQUIRE(surf.size() == 1);
  REQUIRE(surf[0].times.size() == 21);
  for (std::size_t k = 0; k < surf[0].times.size(); ++k) {
    const Curve u = shift(m.f0, surf[0].times[k]);
    CHECK(distance(surf[0].curves[k], u) <= 1e-12 * norm(u));
  }
  const auto spot = spot_path(surf[0]);
  CHECK(spot.back() == doctest::Approx(m.f0(1.0)).epsilon(1e-13));
  const auto fwd = forward_path(surf[0], 0.5);
  CHECK(fwd.size() == 11);
  CHECK(fwd[4] == doctest::Approx(m.f0(0.5)).epsilon(1e-13));
}

TEST_CASE("constant drift adds its transported integral") {
  const Space& s = grid();
  ModelSpec m;
  m.f0 = backwardation(s);
  const Curve b = expo(s, 2.0, 1.3);
  m.beta = [b](double) { return b; };
  m.psi = ScalarPsi{[](double) { return 0.0; }, std::make_shared<IdentityOperator>(s)};
  m.driver.covariance = factors(s, {expo(s, 1.0, 1.0)});
  const double dt = 0.01, t = 1.0;
  const auto surf = simulate_surfaces(m, t, dt, 1);
  // exponential Euler: sum_k dt U_{t - t_k} b, with b(x) = 2 exp(-1.3 x)
  double acc = 0.0;
  for (int k = 0; k < 100; ++k) acc += dt * std::exp(-1.3 * (t - k * dt));
  const Curve expect = shift(m.f0, t) + acc * b;
  for (double x : {0.0, 0.5, 1.0, 1.9}) CHECK(surf[0].curves.back()(x) == doctest::Approx(expect(x)).epsilon(1e-12));
}

TEST_CASE("geometric volatility gives a discrete stochastic exponential") {
  const Space& s = grid();
  const double c = 0.3, dt = 0.01, horizon = 1.0;
  ModelSpec m;
  m.f0 = backwardation(s);
  m.psi = StatePsi{[&s, c](double) { return Curve::constant(s, c); }};
  m.driver.covariance = factors(s, {Curve::constant(s, 1.0)});
  m.driver.seed = 31;
  const std::size_t paths = 200;
  const auto surf = simulate_surfaces(m, horizon, dt, paths);
  double strong = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const NoiseIncrements inc = sample_increments(m.driver, dt, 100, p);
    double prod = 1.0, w = 0.0;
    for (int k = 0; k < 100; ++k) {
      prod *= 1.0 + c * inc.dL(k, 0);
      w += inc.dL(k, 0);
      const Curve expect = prod * shift(m.f0, (k + 1) * dt);
      CHECK(distance(surf[p].curves[static_cast<std::size_t>(k + 1)], expect) <= 1e-12 * norm(expect));
    }
    strong += std::abs(prod - std::exp(c * w - 0.5 * c * c * horizon)) / static_cast<double>(paths);
  }
  // leading log error -(c^2 / 2) sum (dW^2 - dt) is normal with sd (c^2 / 2) sqrt(2 t dt)
  const double expect = std::sqrt(2.0 / M_PI) * 0.5 * c * c * std::sqrt(2.0 * horizon * dt);
  CHECK(strong == doctest::Approx(expect).epsilon(0.25));
}

TEST_CASE("divergence is a hard error") {
  const Space& s = grid();
  ModelSpec m;
  m.f0 = backwardation(s);
  m.psi = StatePsi{[&s](double) { return Curve::constant(s, 1000.0); }};
  m.driver.covariance = factors(s, {Curve::constant(s, 1.0)});
  CHECK_THROWS_AS(simulate_surfaces(m, 1.0, 0.01, 1), DivergenceError);
}

TEST_CASE("exact OU factors agree with the mild scheme") {
  const Space& s = grid();
  OUFactorModel ou;
  ou.f0 = backwardation(s);
  ou.factors = {OUFactor{0.9, 1.4, 0.0}, OUFactor{0.4, 0.8, 0.0}};
  ou.seed = 12;
  const double dt = 0.01, horizon = 1.0;
  const auto exact = ou_factor_surfaces(ou, horizon, dt, 40);
  const auto mild = simulate_surfaces(ou.mild_model(), horizon, dt, 40);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < exact.size(); ++p) {
    for (std::size_t k = 1; k < exact[p].times.size(); ++k) {
      const Curve u = shift(ou.f0, exact[p].times[k]);
      for (double x = 0.0; x <= s.x_max() - horizon; x += 0.25) {
        const double a = exact[p].curves[k](x) - u(x);
        const double b = mild[p].curves[k](x) - u(x);
        num += (a - b) * (a - b);
        den += a * a;
      }
    }
  }
  // left-point weighting of each step's noise: relative RMS error about rate dt / sqrt(3)
  const double ratio = std::sqrt(num / den);
  const double scale = 1.4 * dt / std::sqrt(3.0);
  CHECK(ratio < 2.0 * scale);
  CHECK(ratio > 0.2 * scale);

  OUFactorModel bad = ou;
  bad.factors[0].rate = 0.4;
  CHECK_THROWS_AS(bad.factor_curves(), SpecViolation);
}

TEST_CASE("OU factor moments") {
  const Space& s = grid();
  OUFactorModel ou;
  ou.f0 = Curve::constant(s, 10.0);
  ou.factors = {OUFactor{1.0, 2.0, 0.5}};
  ou.seed = 77;
  const double dt = 0.05, horizon = 1.0;
  const std::size_t paths = 4000;
  double m1 = 0.0, m2 = 0.0;
  ou_factor_simulate(ou, horizon, dt, paths, [&](std::size_t, std::size_t k, double, const Curve& f) {
    if (k != 20) return;
    const double x = f(0.0) - 10.0;
    m1 += x;
    m2 += x * x;
  });
  m1 /= static_cast<double>(paths);
  m2 = m2 / static_cast<double>(paths) - m1 * m1;
  // X(1) = mu (1 - e^{-2}) / 2 + N(0, (1 - e^{-4}) / 4)
  const double mean = 0.5 * (1.0 - std::exp(-2.0)) / 2.0;
  const double var = (1.0 - std::exp(-4.0)) / 4.0;
  CHECK(std::abs(m1 - mean) < 4.0 * std::sqrt(var / paths));
  CHECK(std::abs(m2 - var) < 4.0 * var * std::sqrt(2.0 / paths));
}

TEST_CASE("CARMA kernel against an ODE solution") {
  const Space& s = grid();
  const std::vector<double> ar{3.0, 2.0};  // roots -1, -2
  const std::vector<double> ma{1.0, 0.5};
  using state = std::vector<double>;
  // Z' = A Z, Z(0) = e_2; value b^T Z(x)
  auto rhs = [](const state& z, state& dz, double) {
    dz[0] = z[1];
    dz[1] = -2.0 * z[0] - 3.0 * z[1];
  };
  const Curve k = carma_kernel(s, ar, ma);
  for (double x : {0.0, 0.37, 1.0, 2.5}) {
    state z{0.0, 1.0};
    boost::numeric::odeint::integrate_adaptive(
        boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-13, 1e-13), rhs, z,
        0.0, x, 0.01);
    const double ode = 1.0 * z[0] + 0.5 * z[1];
    CHECK(carma_kernel_value(ar, ma, x) == doctest::Approx(ode).epsilon(1e-10));
    // closed form for distinct roots: (b0 + b1 r) e^{r x} / prod (r - r')
    const double closed = (1.0 - 0.5) * std::exp(-x) / 1.0 + (1.0 - 1.0) * std::exp(-2.0 * x) / -1.0;
    CHECK(ode == doctest::Approx(closed).epsilon(1e-10));
  }
  for (std::size_t i = 0; i <= s.cells(); i += 29) {
    CHECK(k.node_values()[i] == doctest::Approx(carma_kernel_value(ar, ma, s.node(i))).epsilon(1e-11));
  }
  CHECK_THROWS_AS(carma_kernel(s, {0.5, 0.06}, {1.0}), SpecViolation);  // roots -0.2, -0.3
}

TEST_CASE("spot volatility of a separable kernel") {
  const Space& s = grid();
  const double a = 0.7, b = 1.1, lv = 0.8, g = 1.5;
  ModelSpec m;
  m.f0 = Curve::constant(s, 1.0);
  auto op = std::make_shared<KernelOperator>(parse_kernel(s, "separable(xi=0.7,theta=1.1)"));
  m.psi = ScalarPsi{[](double t) { return 1.0 + t; }, op};
  m.driver.covariance = factors(s, {expo(s, lv, g)});
  // Psi(s) g(x) = sigma(s) xi(x) int theta(y) g'(y) dy
  const double integral = -g * lv * (1.0 - std::exp(-(b + g) * s.x_max())) / (b + g);
  for (double t : {0.5, 1.0, 2.0}) {
    for (double u : {0.0, 0.25, 0.5}) {
      const double expect = (1.0 + u) * std::exp(-a * (t - u)) * std::abs(integral);
      CHECK(spot_vol_sigma(m, t, u) == doctest::Approx(expect).epsilon(1e-5));
    }
  }
  const ReducedNoise r = bivariate_sigma(m, 1.0, 2.0, 0.5);
  const double c12 = 1.5 * 1.5 * std::exp(-a * 0.5) * std::exp(-a * 1.5) * integral * integral;
  CHECK(r.covariance(0, 1) == doctest::Approx(c12).epsilon(1e-5));
  CHECK_THROWS_AS(spot_vol_sigma(m, 0.5, 1.0), std::domain_error);
}

TEST_CASE("statistics do not depend on the thread count") {
  const Space& s = grid();
  ModelSpec m;
  m.f0 = backwardation(s);
  m.psi = ConstantPsi{std::make_shared<KernelOperator>(delivery_kernel(s, 0.2))};
  m.driver.covariance = factors(s, {expo(s, 1.0, 1.0), expo(s, 0.5, 2.0)});
  m.driver.kind = DriverKind::NIG;
  m.driver.seed = 4;
  const std::vector<Observable> obs{Observable::spot(), Observable::forward(0.5), Observable::curve_value(1.0)};
  const auto one = simulate_statistics(m, 0.6, 0.02, 300, obs, {{0, 2}}, 1);
  const auto three = simulate_statistics(m, 0.6, 0.02, 300, obs, {{0, 2}}, 3);
  REQUIRE(one.times() == three.times());
  for (std::size_t k = 0; k < one.times(); ++k) {
    for (std::size_t j = 0; j < obs.size(); ++j) {
      CHECK(one.count(k, j) == three.count(k, j));
      if (one.count(k, j) == 0) continue;
      CHECK(one.mean_increment(k, j) == three.mean_increment(k, j));
      CHECK(one.variance(k, j) == three.variance(k, j));
    }
    CHECK(one.covariance(k, 0) == three.covariance(k, 0));
  }
  // forward expires after its maturity
  CHECK(one.count(one.times() - 1, 1) == 0);
  CHECK(one.count(one.times() - 1, 0) == 300);
}

TEST_CASE("path statistics on synthetic data") {
  PathStatistics st({Observable::spot(), Observable::spot()}, 2, {{0, 1}});
  const double a[] = {1.0, 2.0, 4.0, 7.0};
  for (double v : a) st.add_path({{0.0, 0.0}, {v, 2.0 * v}});
  CHECK(st.paths() == 4);
  CHECK(st.mean_increment(1, 0) == doctest::Approx(3.5));
  CHECK(st.variance(1, 0) == doctest::Approx(7.0));  // unbiased
  CHECK(st.covariance(1, 0) == doctest::Approx(14.0));
  CHECK(st.drift_z(1, 0) == doctest::Approx(3.5 / std::sqrt(7.0 / 4.0)));
}
