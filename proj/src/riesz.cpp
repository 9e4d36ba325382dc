#include "fcurve/riesz.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "fcurve/errors.hpp"

namespace fcurve {

namespace {
using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

BiorthogonalSystem::BiorthogonalSystem(Space s, double x0, double lambda, int n_max)
    : space_(std::move(s)), x0_(x0), lambda_(lambda), n_max_(n_max) {
  if (!(lambda > 0.0)) throw ConfigError("basis damping lambda must be positive");
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  if (!(x0 > 0.0) || x0 > space_.x_max() + 1e-12) throw ConfigError("period x0 must lie in (0, x_max]");
  const std::size_t m = space_.steps(x0);
  if (static_cast<std::size_t>(2 * n_max + 1) >= m) {
    throw NumericalError("truncation too large: 2 n_max + 1 must stay below the number of cells in [0, x0]");
  }
  const double dx = space_.dx();
  const double damp = lambda + 0.5 * space_.alpha();
  const double rx0 = std::sqrt(x0);
  const auto w = space_.mid_weights();

  for (int n = -n_max; n <= n_max; ++n) {
    const cd l(-damp, kTwoPi * n / x0);
    eig_.push_back(l);
    modes_.push_back(ComplexCurve::from_function(space_, [l, rx0](double x) {
      return (1.0 - std::exp(l * x)) / (l * rx0);
    }));
    // node sampling turns g_n' into -exp(l x_i) c_n / sqrt(x0) on cell i
    const cd c_n = (std::exp(l * dx) - 1.0) / (l * dx);
    ComplexCurve r(space_);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = space_.node(i);
      const cd v = -std::exp(cd(damp * x, -kTwoPi * n * x / x0)) / (rx0 * c_n * w[i]);
      r.deriv()[i] = std::conj(v);
    }
    duals_.push_back(std::move(r));
  }

  const auto k = static_cast<Eigen::Index>(modes_.size()) + 1;
  gram_.resize(k, k);
  const ComplexCurve one = ComplexCurve::constant(space_, 1.0);
  auto elem = [&](Eigen::Index a) -> const ComplexCurve& { return a == 0 ? one : modes_[static_cast<std::size_t>(a - 1)]; };
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      gram_(a, b) = inner_product(elem(a), elem(b));
      gram_(b, a) = std::conj(gram_(a, b));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  cond_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond_ <= 1e12)) throw NumericalError("truncation too large: basis Gram matrix is ill-conditioned");
}

std::size_t BiorthogonalSystem::index(int n) const {
  if (n < -n_max_ || n > n_max_) throw std::out_of_range("mode index outside truncation");
  return static_cast<std::size_t>(n + n_max_);
}

cd BiorthogonalSystem::eigenvalue(int n) const { return eig_.at(index(n)); }

cd BiorthogonalSystem::coefficient(const ComplexCurve& f, int n) const { return inner_product(f, dual(n)); }

cd BiorthogonalSystem::coefficient(const Curve& f, int n) const {
  require_same_space(space_, f.space());
  const ComplexCurve& r = dual(n);
  const auto w = space_.mid_weights();
  cd acc = 0.0;
  for (std::size_t i = 0; i < f.cells(); ++i) acc += w[i] * f.deriv()[i] * std::conj(r.deriv()[i]);
  return acc * space_.dx();
}

double BiorthogonalSystem::biorthogonality_residual() const {
  double worst = 0.0;
  const ComplexCurve one = ComplexCurve::constant(space_, 1.0);
  for (int n = -n_max_; n <= n_max_; ++n) {
    worst = std::max(worst, std::abs(coefficient(one, n)));
    worst = std::max(worst, std::abs(mode(n).f0()));
    for (int k = -n_max_; k <= n_max_; ++k) {
      const cd v = coefficient(mode(k), n);
      worst = std::max(worst, std::abs(v - (n == k ? 1.0 : 0.0)));
    }
  }
  return worst;
}

BiorthogonalSystem build_basis(const Space& s, double x0, double lambda, int n_max) {
  return BiorthogonalSystem(s, x0, lambda, n_max);
}

BiorthogonalSystem build_basis(const Space& s, double x0, int n_max) {
  return BiorthogonalSystem(s, x0, 0.5 * s.alpha(), n_max);
}

namespace {
Curve real_combination(const BiorthogonalSystem& basis, double constant, const std::vector<cd>& coef) {
  const Space& s = basis.space();
  Curve out(s);
  out.set_f0(constant);
  std::vector<cd> acc(s.cells(), cd(0.0));
  for (int n = -basis.n_max(); n <= basis.n_max(); ++n) {
    const cd a = coef[static_cast<std::size_t>(n + basis.n_max())];
    const auto& d = basis.mode(n).deriv();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * d[i];
  }
  for (std::size_t i = 0; i < acc.size(); ++i) out.deriv()[i] = acc[i].real();
  return out;
}
}  // namespace

Projection project_x0(const BiorthogonalSystem& basis, const Curve& f) {
  std::vector<cd> coef;
  for (int n = -basis.n_max(); n <= basis.n_max(); ++n) coef.push_back(basis.coefficient(f, n));
  Projection p{real_combination(basis, f.f0(), coef), 0.0};
  const auto a = f.node_values();
  const auto b = p.curve.node_values();
  const std::size_t m = basis.space().steps(basis.x0());
  for (std::size_t i = 0; i <= m; ++i) p.window_error = std::max(p.window_error, std::abs(a[i] - b[i]));
  return p;
}

cd semigroup_dual_action(const BiorthogonalSystem& basis, int n, int k, double t) {
  return basis.coefficient(shift(basis.mode(k), t), n);
}

ForwardSurface ou_series_reconstruct(const BiorthogonalSystem& basis, const ModelSpec& model, double horizon,
                                     double dt, std::size_t path) {
  const Space& s = basis.space();
  require_same_space(s, model.f0.space());
  model.driver.validate();
  const std::size_t steps = step_count(horizon, dt);
  s.steps(dt);
  OperatorPtr op;
  std::function<double(double)> sigma = [](double) { return 1.0; };
  if (const auto* c = std::get_if<ConstantPsi>(&model.psi)) {
    op = c->op;
  } else if (const auto* sc = std::get_if<ScalarPsi>(&model.psi)) {
    op = sc->op;
    sigma = sc->sigma;
  } else {
    throw ConfigError("series reconstruction needs a state-independent volatility operator");
  }

  const int nm = basis.n_max();
  const std::size_t modes = static_cast<std::size_t>(2 * nm + 1);
  const auto& factors = model.driver.covariance->factors();
  std::vector<std::vector<cd>> fc(factors.size(), std::vector<cd>(modes));
  std::vector<double> f_zero(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const Curve pg = op->apply(factors[j]);
    f_zero[j] = pg.f0();
    for (int n = -nm; n <= nm; ++n) fc[j][static_cast<std::size_t>(n + nm)] = basis.coefficient(pg, n);
  }
  std::vector<cd> growth(modes), at_dt(modes), y(modes);
  for (int n = -nm; n <= nm; ++n) {
    const auto i = static_cast<std::size_t>(n + nm);
    growth[i] = std::exp(basis.eigenvalue(n) * dt);
    at_dt[i] = basis.mode(n)(dt);
    y[i] = basis.coefficient(model.f0, n);
  }
  double spot = model.f0.f0();

  ForwardSurface out;
  out.times.push_back(0.0);
  out.curves.push_back(real_combination(basis, spot, y));
  std::vector<double> dl(factors.size());
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    sample_step(model.driver, dt, path, k, dl);
    const double sg = sigma(t);
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const double a = sg * dl[j];
      spot += a * f_zero[j];
      for (std::size_t i = 0; i < modes; ++i) y[i] += a * fc[j][i];
    }
    if (model.beta) {
      const Curve b = model.beta(t);
      spot += dt * b.f0();
      for (int n = -nm; n <= nm; ++n) y[static_cast<std::size_t>(n + nm)] += dt * basis.coefficient(b, n);
    }
    // shift: the constant channel picks up every mode's value at dt
    cd gain = 0.0;
    for (std::size_t i = 0; i < modes; ++i) {
      gain += y[i] * at_dt[i];
      y[i] *= growth[i];
    }
    spot += gain.real();
    out.times.push_back(static_cast<double>(k + 1) * dt);
    out.curves.push_back(real_combination(basis, spot, y));
  }
  return out;
}

EmbeddingCheck embedding_bounds_check(const std::function<cd(double)>& f, double period, double lambda) {
  if (!(period > 0.0) || !(lambda > 0.0)) throw ConfigError("embedding check needs positive period and lambda");
  using boost::math::quadrature::gauss;
  constexpr int kPieces = 32;
  const double h = period / kPieces;
  double fn = 0.0;
  for (int j = 0; j < kPieces; ++j) {
    const double a = j * h;
    fn += gauss<double, 30>::integrate([&](double x) { return std::norm(f(x)); }, a, a + h);
  }
  // direct quadrature of |Af|^2 period by period until the damping is negligible
  const double q = std::exp(-2.0 * lambda * period);
  double af = 0.0;
  for (int n = 0; n < 1000000; ++n) {
    const double start = n * period;
    if (std::exp(-2.0 * lambda * start) < 1e-18) break;
    for (int j = 0; j < kPieces; ++j) {
      const double a = start + j * h;
      af += gauss<double, 30>::integrate(
          [&](double x) { return std::exp(-2.0 * lambda * x) * std::norm(f(x - start)); }, a, a + h);
    }
  }
  EmbeddingCheck out;
  out.f_norm_sq = fn;
  out.af_norm_sq = af;
  out.lower = q / (1.0 - q) * fn;
  out.upper = fn / (1.0 - q);
  const double slack = 1e-12 * std::max(1.0, out.upper);
  out.holds = out.af_norm_sq >= out.lower - slack && out.af_norm_sq <= out.upper + slack;
  return out;
}

}  // namespace fcurve
