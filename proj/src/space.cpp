#include "fcurve/space.hpp"

#include <algorithm>
#include <string>

#include "fcurve/errors.hpp"

namespace fcurve {

namespace {
constexpr double kSnap = 1e-9;
}

Space::Space(WeightSpec weight, GridSpec grid) {
  if (!(weight.alpha > 0.0) || !std::isfinite(weight.alpha)) {
    throw ConfigError("weight alpha must be positive, got " + std::to_string(weight.alpha));
  }
  if (!(grid.dx > 0.0) || !(grid.x_max > 0.0)) {
    throw ConfigError("grid dx and x_max must be positive");
  }
  const double ratio = grid.x_max / grid.dx;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > kSnap * std::max(1.0, ratio) || n < 1.0) {
    throw ConfigError("x_max must be a whole multiple of dx");
  }
  auto d = std::make_shared<Data>();
  d->weight = weight;
  d->grid = grid;
  d->cells = static_cast<std::size_t>(n);
  d->w.resize(d->cells);
  d->scale.resize(d->cells);
  for (std::size_t i = 0; i < d->cells; ++i) {
    d->w[i] = weight((static_cast<double>(i) + 0.5) * grid.dx);
    d->scale[i] = std::sqrt(d->w[i] * grid.dx);
  }
  d_ = std::move(d);
}

CellPos Space::locate(double x) const {
  if (!(x >= 0.0)) throw std::domain_error("evaluation point must be non-negative");
  const double r = x / dx();
  if (r >= static_cast<double>(cells()) - kSnap) return {cells(), 0.0};
  double k = std::floor(r);
  double frac = r - k;
  if (frac > 1.0 - kSnap) {
    k += 1.0;
    frac = 0.0;
  } else if (frac < kSnap) {
    frac = 0.0;
  }
  return {static_cast<std::size_t>(k), frac};
}

std::size_t Space::steps(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("shift must be non-negative");
  const double r = t / dx();
  const double n = std::round(r);
  if (std::abs(r - n) > kSnap * std::max(1.0, r)) {
    throw std::invalid_argument("shift must be a whole number of grid cells");
  }
  return static_cast<std::size_t>(n);
}

bool Space::operator==(const Space& o) const {
  if (d_ == o.d_) return true;
  return d_->weight.alpha == o.d_->weight.alpha && d_->grid.dx == o.d_->grid.dx &&
         d_->cells == o.d_->cells;
}

void require_same_space(const Space& a, const Space& b) {
  if (a != b) throw std::invalid_argument("curves live on different spaces");
}

double distance(const Curve& f, const Curve& g) {
  require_same_space(f.space(), g.space());
  const auto w = f.space().mid_weights();
  const auto& a = f.deriv();
  const auto& b = g.deriv();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    acc += w[i] * e * e;
  }
  const double e0 = f.f0() - g.f0();
  return std::sqrt(e0 * e0 + acc * f.space().dx());
}

double sup_norm(const Curve& f) {
  double m = 0.0;
  for (double v : f.node_values()) m = std::max(m, std::abs(v));
  return m;
}

Curve h_curve(const Space& s, double x) {
  if (std::isinf(x) && x > 0) return h_infinity(s);
  const CellPos p = s.locate(x);
  Curve h(s);
  h.set_f0(1.0);
  const auto w = s.mid_weights();
  auto& d = h.deriv();
  for (std::size_t i = 0; i < p.cell; ++i) d[i] = 1.0 / w[i];
  if (p.frac > 0.0) d[p.cell] = p.frac / w[p.cell];
  return h;
}

Curve h_infinity(const Space& s) { return h_curve(s, s.x_max()); }

Curve multiply(const Curve& f, const Curve& g) {
  require_same_space(f.space(), g.space());
  const auto fv = f.node_values();
  const auto gv = g.node_values();
  Curve out(f.space());
  out.set_f0(fv[0] * gv[0]);
  auto& d = out.deriv();
  const auto& fd = f.deriv();
  const auto& gd = g.deriv();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double fm = 0.5 * (fv[i] + fv[i + 1]);
    const double gm = 0.5 * (gv[i] + gv[i + 1]);
    d[i] = fd[i] * gm + fm * gd[i];
  }
  return out;
}

Eigen::VectorXd to_coordinates(const Curve& f) {
  const auto sc = f.space().coord_scale();
  Eigen::VectorXd c(f.cells() + 1);
  c[0] = f.f0();
  for (std::size_t i = 0; i < f.cells(); ++i) c[i + 1] = sc[i] * f.deriv()[i];
  return c;
}

Curve from_coordinates(const Space& s, const Eigen::Ref<const Eigen::VectorXd>& c) {
  if (static_cast<std::size_t>(c.size()) != s.cells() + 1) {
    throw std::invalid_argument("coordinate vector does not match grid");
  }
  const auto sc = s.coord_scale();
  Curve f(s);
  f.set_f0(c[0]);
  for (std::size_t i = 0; i < s.cells(); ++i) f.deriv()[i] = c[i + 1] / sc[i];
  return f;
}

}  // namespace fcurve
