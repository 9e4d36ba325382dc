#include "fcurve/analytics.hpp"

#include <cmath>

#include "fcurve/errors.hpp"

namespace fcurve {

namespace {
struct Moments {
  double xx, yy, xy;
};

Moments moments(const FactorCovariance& q, double x, double y) {
  const Space& s = q.space();
  const Curve hx = h_curve(s, x);
  const Curve hy = h_curve(s, y);
  const Curve qx = q.apply(hx);
  const Curve qy = q.apply(hy);
  return {inner_product(qx, hx), inner_product(qy, hy), inner_product(qx, hy)};
}

double rho_of(const Moments& m) {
  const double den = std::sqrt(m.xx * m.yy);
  if (!(den > 0.0)) return 1.0;
  return m.xy / den;
}
}  // namespace

double spatial_correlation(const FactorCovariance& q, double x, double y) { return rho_of(moments(q, x, y)); }

CorrelationBound correlation_lower_bound(const FactorCovariance& q, double x, double y) {
  const Moments m = moments(q, x, y);
  const double op = q.op_norm();
  CorrelationBound out;
  out.rho = rho_of(m);
  const double chx = std::sqrt(std::max(0.0, m.xx));
  const double d = std::sqrt(std::abs(x - y));
  const double a = std::sqrt(op) * d;
  out.lower_bound = (chx + a) > 0.0 ? 1.0 - 2.0 * a / (chx + a) : 1.0;
  out.radius = op > 0.0 ? m.xx / op : 0.0;
  out.in_radius = std::abs(x - y) < out.radius;
  return out;
}

double exp_kernel_correlation(double alpha, double delta, double x, double y) {
  if (!(delta > 0.0) || !(delta < alpha)) throw ConfigError("exp-kernel correlation needs 0 < delta < alpha");
  if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("exp-kernel correlation needs positive arguments");
  if (x > y) std::swap(x, y);
  const double r = alpha - delta;
  return std::exp(-0.5 * delta * (y - x)) * std::sqrt(std::expm1(-r * x) / std::expm1(-r * y));
}

std::vector<CorrelationRow> correlation_table(const FactorCovariance& q, const std::vector<double>& xs,
                                              const std::vector<double>& ys) {
  std::vector<CorrelationRow> out;
  out.reserve(xs.size() * ys.size());
  for (double x : xs) {
    for (double y : ys) out.push_back({x, y, correlation_lower_bound(q, x, y)});
  }
  return out;
}

}  // namespace fcurve
