#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "fcurve/errors.hpp"
#include "fcurve/riesz.hpp"
#include "support.hpp"

using namespace fcurve;
using cd = std::complex<double>;

namespace {

// Real element of the span: c + sum_n a_n g_n with a_{-n} = conj(a_n).
Curve span_element(const BiorthogonalSystem& b, std::mt19937_64& rng, std::vector<cd>& coef) {
  std::normal_distribution<double> nd;
  const int nm = b.n_max();
  coef.assign(static_cast<std::size_t>(2 * nm + 1), cd(0.0));
  coef[static_cast<std::size_t>(nm)] = nd(rng);
  for (int n = 1; n <= nm; ++n) {
    const cd a(nd(rng) / n, nd(rng) / n);
    coef[static_cast<std::size_t>(nm + n)] = a;
    coef[static_cast<std::size_t>(nm - n)] = std::conj(a);
  }
  Curve f(b.space());
  f.set_f0(nd(rng));
  for (int n = -nm; n <= nm; ++n) {
    const auto& d = b.mode(n).deriv();
    for (std::size_t i = 0; i < f.cells(); ++i) f.deriv()[i] += (coef[static_cast<std::size_t>(n + nm)] * d[i]).real();
  }
  return f;
}

}  // namespace

TEST_CASE("modes, eigenvalues and biorthogonality") {
  const Space s;
  const BiorthogonalSystem b = build_basis(s, 2.0, 8);
  CHECK(b.lambda() == 0.5);
  CHECK(b.biorthogonality_residual() < 1e-10);
  CHECK(b.condition_number() < 1e12);
  const double pi = std::acos(-1.0);
  for (int n : {-3, 0, 5}) {
    const cd l = b.eigenvalue(n);
    CHECK(l.real() == doctest::Approx(-1.0));
    CHECK(l.imag() == doctest::Approx(2.0 * pi * n / 2.0));
    const ComplexCurve& g = b.mode(n);
    CHECK(g.f0() == cd(0.0));
    for (double x : {0.4, 1.0, 3.2}) {
      const cd expect = (1.0 - std::exp(l * x)) / (l * std::sqrt(2.0));
      CHECK(std::abs(g(x) - expect) < 1e-12);
    }
    CHECK(std::abs(b.coefficient(b.constant_mode(), n)) < 1e-14);
  }
  const ComplexCurve gm = b.mode(-4);
  const ComplexCurve gp = b.mode(4);
  CHECK(std::abs(gm(1.3) - std::conj(gp(1.3))) < 1e-14);
  CHECK_THROWS_AS(b.mode(9), std::out_of_range);
}

TEST_CASE("invalid truncations are rejected") {
  const Space s(WeightSpec{1.0}, GridSpec{3.0, 0.1});
  CHECK_THROWS_AS(build_basis(s, 2.0, 10), NumericalError);  // 21 modes, 20 cells
  CHECK_NOTHROW(build_basis(s, 2.0, 9));
  CHECK_THROWS_AS(build_basis(s, 2.05, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_basis(s, 4.0, 3), ConfigError);
  CHECK_THROWS_AS(build_basis(s, 2.0, -1.0, 3), ConfigError);
}

TEST_CASE("shift semigroup acts diagonally on the duals") {
  const Space s;
  const BiorthogonalSystem b = build_basis(s, 2.0, 0.8, 6);
  for (double t : {0.0, 0.3, 1.5}) {
    for (int k : {-6, -1, 0, 2, 6}) {
      for (int n : {-6, -1, 0, 2, 6}) {
        const cd v = semigroup_dual_action(b, n, k, t);
        const cd expect = n == k ? std::exp(b.eigenvalue(k) * t) : cd(0.0);
        CHECK(std::abs(v - expect) < 1e-10);
      }
    }
  }
}

TEST_CASE("projection") {
  const Space s;
  std::mt19937_64 rng(6);
  SUBCASE("span elements are reproduced with their coefficients") {
    const BiorthogonalSystem b = build_basis(s, 2.0, 6);
    std::vector<cd> coef;
    const Curve f = span_element(b, rng, coef);
    for (int n = -6; n <= 6; ++n) CHECK(std::abs(b.coefficient(f, n) - coef[static_cast<std::size_t>(n + 6)]) < 1e-10);
    const Projection p = project_x0(b, f);
    CHECK(distance(p.curve, f) < 1e-10 * norm(f));
    CHECK(p.window_error < 1e-10);
  }
  SUBCASE("Gram route gives the same coefficients on the span") {
    const BiorthogonalSystem b = build_basis(s, 2.0, 5);
    std::vector<cd> coef;
    const Curve f = span_element(b, rng, coef);
    const ComplexCurve fc = ComplexCurve::from_nodes(s, [&] {
      std::vector<cd> v;
      for (double x : f.node_values()) v.emplace_back(x);
      return v;
    }());
    const Eigen::Index k = b.gram().rows();
    Eigen::VectorXcd rhs(k);
    rhs(0) = inner_product(fc, ComplexCurve::constant(s, 1.0));
    for (int n = -5; n <= 5; ++n) rhs(n + 6) = inner_product(fc, b.mode(n));
    // G_{ab} = <e_a, e_b>; f = sum_b c_b e_b gives <f, e_a> = sum_b c_b <e_b, e_a> = (G^T c)_a
    const Eigen::VectorXcd c = b.gram().transpose().lu().solve(rhs);
    CHECK(std::abs(c(0) - f.f0()) < 1e-9);
    for (int n = -5; n <= 5; ++n) CHECK(std::abs(c(n + 6) - b.coefficient(f, n)) < 1e-8);
  }
  SUBCASE("window error of a kinked curve shrinks with the truncation") {
    const Curve h1 = h_curve(s, 1.0);
    double prev = 1e300;
    double first = 0.0;
    for (int nm : {2, 4, 8, 16, 32}) {
      const double e = project_x0(build_basis(s, 2.0, nm), h1).window_error;
      CHECK(e <= prev);
      if (nm == 2) first = e;
      prev = e;
    }
    CHECK(prev < 0.25 * first);
  }
}

TEST_CASE("OU series reproduces the mild scheme on the span") {
  const Space s(WeightSpec{1.0}, GridSpec{4.0, 0.01});
  const BiorthogonalSystem b = build_basis(s, 2.0, 6);
  ModelSpec m;
  m.f0 = Curve::from_function(s, [](double x) { return 40.0 - 5.0 * std::exp(-0.9 * x); });
  const std::vector<Curve> g{Curve::from_function(s, [](double x) { return 0.9 * std::exp(-1.4 * x); }),
                             Curve::from_function(s, [](double x) { return 0.3 * std::sin(3.0 * x) * std::exp(-x); })};
  m.driver.covariance = std::make_shared<FactorCovariance>(s, g);
  m.driver.seed = 8;
  const Curve beta = Curve::from_function(s, [](double x) { return 0.2 * std::exp(-2.0 * x); });
  m.beta = [beta](double) { return beta; };
  auto psi = std::make_shared<KernelOperator>(delivery_kernel(s, 0.25));
  m.psi = ScalarPsi{[](double t) { return 1.0 + 0.5 * t; }, psi};

  // the same model with every input projected onto the span
  ModelSpec pm = m;
  pm.f0 = project_x0(b, m.f0).curve;
  std::vector<Curve> pg;
  for (const Curve& gi : g) pg.push_back(project_x0(b, psi->apply(gi)).curve);
  pm.driver.covariance = std::make_shared<FactorCovariance>(s, pg);
  const Curve pbeta = project_x0(b, beta).curve;
  pm.beta = [pbeta](double) { return pbeta; };
  pm.psi = ScalarPsi{[](double t) { return 1.0 + 0.5 * t; }, std::make_shared<IdentityOperator>(s)};

  const double horizon = 1.0, dt = 0.02;
  const auto mild = simulate_surfaces(pm, horizon, dt, 3);
  for (std::size_t p = 0; p < 3; ++p) {
    const ForwardSurface series = ou_series_reconstruct(b, m, horizon, dt, p);
    REQUIRE(series.curves.size() == mild[p].curves.size());
    for (std::size_t k = 0; k < series.curves.size(); k += 5) {
      // the grid shift zero-pads its last cells, so compare where x + t stays on the grid
      const auto a = series.curves[k].node_values();
      const auto c = mild[p].curves[k].node_values();
      const std::size_t last = s.cells() - s.steps(series.times[k]);
      double worst = 0.0;
      for (std::size_t i = 0; i <= last; ++i) worst = std::max(worst, std::abs(a[i] - c[i]));
      CHECK(worst < 1e-9 * std::abs(c[0]));
    }
  }

  ModelSpec state = m;
  state.psi = StatePsi{[&s](double) { return Curve::constant(s, 1.0); }};
  CHECK_THROWS_AS(ou_series_reconstruct(b, state, horizon, dt, 0), ConfigError);
}

TEST_CASE("damped periodic embedding") {
  SUBCASE("unit function") {
    const EmbeddingCheck e = embedding_bounds_check([](double) { return cd(1.0); }, 1.0, 1.0);
    CHECK(e.f_norm_sq == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(e.af_norm_sq == doctest::Approx(0.5).epsilon(1e-12));
    const double q = std::exp(-2.0);
    CHECK(e.lower == doctest::Approx(q / (1.0 - q)));
    CHECK(e.upper == doctest::Approx(1.0 / (1.0 - q)));
    CHECK(e.holds);
  }
  SUBCASE("trigonometric functions") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (int r = 0; r < 5; ++r) {
      const double a = nd(rng), bb = nd(rng), fr = 1.0 + r;
      const double period = 0.5 + 0.5 * r;
      const double pi = std::acos(-1.0);
      const auto f = [=](double x) { return cd(a, 0.0) + bb * std::exp(cd(0.0, 2.0 * pi * fr * x / period)); };
      const EmbeddingCheck e = embedding_bounds_check(f, period, 0.3 + 0.2 * r);
      CHECK(e.holds);
      CHECK(e.f_norm_sq == doctest::Approx((a * a + bb * bb) * period).epsilon(1e-10));
    }
  }
}
