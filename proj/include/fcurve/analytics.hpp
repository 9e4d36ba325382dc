#pragma once

#include <vector>

#include "fcurve/noise.hpp"

namespace fcurve {

// rho(x, y) = <Q h_x, h_y> / sqrt(<Q h_x, h_x> <Q h_y, h_y>); 1 when undefined.
double spatial_correlation(const FactorCovariance& q, double x, double y);

struct CorrelationBound {
  double rho = 1.0;
  // 1 - 2 |Q|^{1/2} sqrt|x-y| / (|Q^{1/2} h_x| + |Q|^{1/2} sqrt|x-y|)
  double lower_bound = 1.0;
  // |Q^{1/2} h_x|^2 / |Q|; the bound applies for |x - y| below this
  double radius = 0.0;
  bool in_radius = false;
};

CorrelationBound correlation_lower_bound(const FactorCovariance& q, double x, double y);

// Closed-form correlation for the exponential kernel q(y, v) = exp(-delta |y - v|)
// with weight exp(alpha v), 0 < delta < alpha, 0 < x <= y (arguments are swapped otherwise).
double exp_kernel_correlation(double alpha, double delta, double x, double y);

struct CorrelationRow {
  double x = 0.0;
  double y = 0.0;
  CorrelationBound bound;
};

std::vector<CorrelationRow> correlation_table(const FactorCovariance& q, const std::vector<double>& xs,
                                              const std::vector<double>& ys);

}  // namespace fcurve
