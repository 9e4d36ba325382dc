#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace fcurve {

// Exponential weight w(x) = exp(alpha x).
struct WeightSpec {
  double alpha = 1.0;

  double operator()(double x) const { return std::exp(alpha * x); }
  // integral of 1/w over [0, inf)
  double k_squared() const { return 1.0 / alpha; }
};

struct GridSpec {
  double x_max = 5.0;
  double dx = 1.0 / 250.0;
};

// Location of a point inside the grid: whole cells below it plus the covered
// fraction of the next cell. Points at or beyond x_max report cell == cells().
struct CellPos {
  std::size_t cell = 0;
  double frac = 0.0;
};

// The discretised weighted space: nodes x_i = i*dx, i = 0..N, derivative
// samples live at cell midpoints (i + 1/2) dx.
class Space {
 public:
  Space() : Space(WeightSpec{}, GridSpec{}) {}
  Space(WeightSpec weight, GridSpec grid);

  double alpha() const { return d_->weight.alpha; }
  double dx() const { return d_->grid.dx; }
  double x_max() const { return d_->grid.x_max; }
  std::size_t cells() const { return d_->cells; }
  const WeightSpec& weight() const { return d_->weight; }
  const GridSpec& grid() const { return d_->grid; }

  double node(std::size_t i) const { return static_cast<double>(i) * dx(); }
  double midpoint(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }

  // w at the cell midpoints
  std::span<const double> mid_weights() const { return d_->w; }
  // sqrt(w dx) at the cell midpoints: the scaling into orthonormal coordinates
  std::span<const double> coord_scale() const { return d_->scale; }

  CellPos locate(double x) const;
  // t expressed as a whole number of cells; throws if t is off-grid
  std::size_t steps(double t) const;

  bool operator==(const Space& o) const;
  bool operator!=(const Space& o) const { return !(*this == o); }

 private:
  struct Data {
    WeightSpec weight;
    GridSpec grid;
    std::size_t cells = 0;
    std::vector<double> w;
    std::vector<double> scale;
  };
  std::shared_ptr<const Data> d_;
};

void require_same_space(const Space& a, const Space& b);

namespace detail {
template <class T>
inline T conj_if(const T& v) {
  if constexpr (std::is_same_v<T, std::complex<double>>) {
    return std::conj(v);
  } else {
    return v;
  }
}
}  // namespace detail

// A curve stored as its value at zero plus cell-midpoint derivative samples.
// Beyond x_max the curve is continued flat.
template <class T>
class BasicCurve {
 public:
  using value_type = T;

  BasicCurve() : deriv_(space_.cells(), T{}) {}
  explicit BasicCurve(Space s) : space_(std::move(s)), deriv_(space_.cells(), T{}) {}
  BasicCurve(Space s, T f0, std::vector<T> deriv)
      : space_(std::move(s)), f0_(f0), deriv_(std::move(deriv)) {
    if (deriv_.size() != space_.cells()) {
      throw std::invalid_argument("derivative sample count does not match grid");
    }
  }

  // Piecewise-linear interpolant of the given node values (N + 1 of them).
  static BasicCurve from_nodes(const Space& s, std::span<const T> nodes) {
    if (nodes.size() != s.cells() + 1) {
      throw std::invalid_argument("node count does not match grid");
    }
    BasicCurve c(s);
    c.f0_ = nodes[0];
    const double inv = 1.0 / s.dx();
    for (std::size_t i = 0; i < s.cells(); ++i) c.deriv_[i] = (nodes[i + 1] - nodes[i]) * inv;
    return c;
  }

  // Samples f at the nodes.
  static BasicCurve from_function(const Space& s, const std::function<T(double)>& f) {
    std::vector<T> nodes(s.cells() + 1);
    for (std::size_t i = 0; i <= s.cells(); ++i) nodes[i] = f(s.node(i));
    return from_nodes(s, nodes);
  }

  // Value at zero plus the derivative sampled at cell midpoints.
  static BasicCurve from_derivative(const Space& s, T f0, const std::function<T(double)>& fprime) {
    BasicCurve c(s);
    c.f0_ = f0;
    for (std::size_t i = 0; i < s.cells(); ++i) c.deriv_[i] = fprime(s.midpoint(i));
    return c;
  }

  static BasicCurve constant(const Space& s, T v) {
    BasicCurve c(s);
    c.f0_ = v;
    return c;
  }

  const Space& space() const { return space_; }
  std::size_t cells() const { return deriv_.size(); }
  T f0() const { return f0_; }
  void set_f0(T v) { f0_ = v; }
  std::vector<T>& deriv() { return deriv_; }
  const std::vector<T>& deriv() const { return deriv_; }

  // Values at all nodes, accumulated left to right from f0.
  std::vector<T> node_values() const {
    std::vector<T> v(deriv_.size() + 1);
    const double dx = space_.dx();
    T acc = f0_;
    v[0] = acc;
    for (std::size_t i = 0; i < deriv_.size(); ++i) {
      acc += deriv_[i] * dx;
      v[i + 1] = acc;
    }
    return v;
  }

  T operator()(double x) const {
    const CellPos p = space_.locate(x);
    const double dx = space_.dx();
    T acc = f0_;
    for (std::size_t i = 0; i < p.cell; ++i) acc += deriv_[i] * dx;
    if (p.frac > 0.0) acc += deriv_[p.cell] * (p.frac * dx);
    return acc;
  }

  BasicCurve& operator+=(const BasicCurve& o) { return axpy(T{1}, o); }
  BasicCurve& operator-=(const BasicCurve& o) { return axpy(T{-1}, o); }
  BasicCurve& operator*=(T a) {
    f0_ *= a;
    for (auto& d : deriv_) d *= a;
    return *this;
  }
  // this += a * o
  BasicCurve& axpy(T a, const BasicCurve& o) {
    require_same_space(space_, o.space_);
    f0_ += a * o.f0_;
    for (std::size_t i = 0; i < deriv_.size(); ++i) deriv_[i] += a * o.deriv_[i];
    return *this;
  }

  friend BasicCurve operator+(BasicCurve a, const BasicCurve& b) { return a += b; }
  friend BasicCurve operator-(BasicCurve a, const BasicCurve& b) { return a -= b; }
  friend BasicCurve operator*(T s, BasicCurve a) { return a *= s; }
  friend BasicCurve operator*(BasicCurve a, T s) { return a *= s; }

 private:
  Space space_;
  T f0_{};
  std::vector<T> deriv_;
};

using Curve = BasicCurve<double>;
using ComplexCurve = BasicCurve<std::complex<double>>;

// <f, g> = f(0) conj(g(0)) + int w f' conj(g'); linear in the first argument.
template <class T>
T inner_product(const BasicCurve<T>& f, const BasicCurve<T>& g) {
  require_same_space(f.space(), g.space());
  const auto w = f.space().mid_weights();
  const auto& a = f.deriv();
  const auto& b = g.deriv();
  T acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * a[i] * detail::conj_if(b[i]);
  return f.f0() * detail::conj_if(g.f0()) + acc * f.space().dx();
}

template <class T>
double norm(const BasicCurve<T>& f) {
  const auto w = f.space().mid_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.cells(); ++i) acc += w[i] * std::norm(f.deriv()[i]);
  return std::sqrt(std::norm(f.f0()) + acc * f.space().dx());
}

// ||f - g|| without materialising the difference.
double distance(const Curve& f, const Curve& g);

template <class T>
T point_eval(const BasicCurve<T>& f, double x) {
  return f(x);
}

// Largest absolute node value; equals the sup over [0, inf) for the
// piecewise-linear, flat-extended representation.
double sup_norm(const Curve& f);

// Representer of evaluation at x: <h_x, f> = f(x). x = +inf gives h_inf.
Curve h_curve(const Space& s, double x);
Curve h_infinity(const Space& s);

// Left shift (U_t f)(x) = f(x + t); t must be a whole number of cells.
template <class T>
BasicCurve<T> shift(const BasicCurve<T>& f, double t) {
  const std::size_t m = f.space().steps(t);
  BasicCurve<T> out(f.space());
  out.set_f0(f(t));
  const auto& d = f.deriv();
  auto& o = out.deriv();
  for (std::size_t i = 0; i + m < d.size(); ++i) o[i] = d[i + m];
  return out;
}

// In-place shift by m cells.
template <class T>
void shift_in_place(BasicCurve<T>& f, std::size_t m) {
  auto& d = f.deriv();
  const double dx = f.space().dx();
  T acc = f.f0();
  const std::size_t n = d.size();
  const std::size_t mm = m < n ? m : n;
  for (std::size_t i = 0; i < mm; ++i) acc += d[i] * dx;
  f.set_f0(acc);
  for (std::size_t i = 0; i + mm < n; ++i) d[i] = d[i + mm];
  for (std::size_t i = n - mm; i < n; ++i) d[i] = T{};
}

// Pointwise product; node values of the result are products of node values.
Curve multiply(const Curve& f, const Curve& g);

// Orthonormal coordinates: (f(0), sqrt(w_i dx) f'_i).
Eigen::VectorXd to_coordinates(const Curve& f);
Curve from_coordinates(const Space& s, const Eigen::Ref<const Eigen::VectorXd>& c);

}  // namespace fcurve
